"""cubikit: desk-scale geometry of right-angled Artin groups.

Finite balls of the universal covers X and X_e, right-angled buildings and
their Davis realizations, restriction quotients and Z-blow-ups, Sageev duals
of finite wallspaces, and the track-based semiconjugacy for groups acting on
the integers by quasi-isometries.
"""

__version__ = "0.1.0"
