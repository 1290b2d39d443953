"""Exception types shared across the solver stack."""


class InvalidInput(ValueError):
    """Argument outside a routine's documented domain (non-finite, wrong sign, ...)."""


class BracketFailure(RuntimeError):
    """Bisection could not establish a valid bracket after geometric expansion."""


class InvalidModel(RuntimeError):
    """Rate-model quantity violated a structural property; indicates a bug upstream."""


class InfeasibleReflection(RuntimeError):
    """Reflection amplitudes consume the whole RIS budget on noise amplification."""


class NonMonotoneObjective(RuntimeError):
    """BCD objective decreased beyond tolerance; the algorithm guarantees ascent."""
