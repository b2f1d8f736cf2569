"""Exception hierarchy shared by the library and the command line.

Each exception carries the process exit code the CLI uses when it escapes a
command: 2 for configuration problems, 3 for numerical failures and 4 for
regime violations reported under ``--strict``.
"""


class KapitzaError(Exception):
    """Base class for all library errors"""
    exit_code = 1


class ConfigError(KapitzaError):
    """Invalid run configuration or grid specification"""
    exit_code = 2


class NonPositiveInput(ConfigError):
    """A physical parameter that must be positive is not"""


class ParameterDomain(ConfigError):
    """Couplings outside the domain an operation supports"""


class NotDoubleWell(ConfigError):
    """Potential has no barrier between the saddles at 0 and pi"""


class EnergyOutOfRange(ConfigError):
    """Energy outside the interval an operation requires"""


class OrderBeyondTable(ConfigError):
    """Requested order exceeds the stored coefficient table"""


class WeakSeriesSingular(ConfigError):
    """Weak-coupling Mathieu series evaluated at its pole"""


class BranchViolation(ConfigError):
    """Angle outside the real branch of the canonical coordinate"""


class PathSingularity(ConfigError):
    """Integration path passes too close to a singular point"""


class NumericalError(KapitzaError):
    """Base class for numerical failures"""
    exit_code = 3


class NoConvergence(NumericalError):
    """Eigenvalues did not settle under cutoff refinement"""


class IntegratorFailure(NumericalError):
    """ODE integration over one period did not succeed"""


class AmbiguousNode(NumericalError):
    """Grid refinement could not separate sign changes"""


class GaugeConflict(NumericalError):
    """Nonzero projection onto the leading parabolic cylinder function"""


class RegionViolation(KapitzaError):
    """Evaluation outside the validity region of an approximation"""
    exit_code = 4
