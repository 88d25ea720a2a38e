"""Two-ion Ramsey spectroscopy with decoherence-free parity readout.

Simulates entangled and product states of two 40Ca+ ions under collective
magnetic-field and laser noise, and fits the resulting parity signals.
"""
from .atomic import (D, LevelPair, QuadrupoleEnvironment, S, Sublevel,
                     coherence_sensitivities, gradient_pair, linewidth_pairs,
                     quadrupole_pairs, zeeman_shift, quadrupole_shift)
from .errors import (ConfigError, DegenerateDesign, IdenticalLevels, InsufficientData,
                     IonPairError, NoConvergence, UnknownScenario, ZeroNoise)
from .experiment import (Bell, DephasedProduct, Fixed, ParityTrace, PhaseScan, Product,
                         RamseyPlan, RandomizedBFieldSensitive, RandomizedLaserSensitive,
                         WaitScan, expected_parity, run_plan)
from .noise import NoiseModel
from .trap import TrapConfig, gradient_from_axial_freq, two_ion_distance

__version__ = "0.1.0"
