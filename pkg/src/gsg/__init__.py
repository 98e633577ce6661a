"""Gravity-induced entanglement between two spin-split masses.

Spin states and their Husimi maps (``spin_states``), Stern-Gerlach loop
dynamics (``gsg_dynamics``), gravitational phases and entanglement measures
(``entanglement``), scattering decoherence (``decoherence``) and the state
optimizer (``optimizer``).  ``gsg.cli`` is the command-line front end.
"""

__version__ = "0.1.0"
