"""Ready-made systems: the damped vibrating string, the Timoshenko beam and the
two-line transport network whose growth depends on the coupling gain."""

from .. import transportnet
from ..exprlang import Binary, Constant, Node, parse_or_constant
from .fields import CoefficientField
from .system import DeclaredBounds, PHSystem, SampleGrid, build_system

__all__ = ["string", "timoshenko", "counterexample"]


def _reciprocal(value) -> Node:
    node = parse_or_constant(value)
    if isinstance(node, Constant):
        if node.value == 0.0:
            raise ValueError("coefficient must be nonzero, got 0")
        return Constant(1.0 / node.value)
    return Binary("/", Constant(1.0), node)


def preset_string(
    rho=1.0,
    T=1.0,
    k=1.0,
    interval=(0.0, 1.0),
    declared: DeclaredBounds = None,
    sample_grid: SampleGrid = None,
) -> PHSystem:
    """String with mass density rho, Young's modulus T and a damper of gain k at b.

    The state is (rho w_t, w_zeta); the left end is clamped and the right end
    satisfies k w_t(b) + T w_zeta(b) = 0.
    """
    k = float(k)
    if k < 0:
        raise ValueError("damper gain k must be >= 0, got %s" % k)
    H = CoefficientField(
        (
            (_reciprocal(rho), Constant(0.0)),
            (Constant(0.0), parse_or_constant(T)),
        )
    )
    return build_system(
        interval,
        P0=[[0.0, 0.0], [0.0, 0.0]],
        P1=[[0.0, 1.0], [1.0, 0.0]],
        W_tilde_B=[[k, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]],
        H=H,
        declared=declared,
        sample_grid=sample_grid,
        name="string",
    )


def preset_timoshenko(
    K=1.0,
    rho=1.0,
    EI=1.0,
    Irho=1.0,
    alpha1=1.0,
    alpha2=1.0,
    interval=(0.0, 1.0),
    declared: DeclaredBounds = None,
    sample_grid: SampleGrid = None,
) -> PHSystem:
    """Timoshenko beam with shear modulus K, mass density rho, flexural rigidity EI
    and rotational inertia Irho.

    The state is (shear strain, momentum, bending strain, angular momentum). The
    beam is clamped at a and has dampers of gain alpha1, alpha2 at b.
    """
    zero = Constant(0.0)
    diagonal = (
        parse_or_constant(K),
        _reciprocal(rho),
        parse_or_constant(EI),
        _reciprocal(Irho),
    )
    H = CoefficientField(
        tuple(tuple(diagonal[i] if i == j else zero for j in range(4)) for i in range(4))
    )
    alpha1, alpha2 = float(alpha1), float(alpha2)
    return build_system(
        interval,
        P0=[
            [0.0, 0.0, 0.0, -1.0],
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
        ],
        P1=[
            [0.0, 1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 1.0, 0.0],
        ],
        W_tilde_B=[
            [0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
            [1.0, alpha1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, alpha2, 0.0, 0.0, 0.0, 0.0],
        ],
        H=H,
        declared=declared,
        sample_grid=sample_grid,
        name="timoshenko",
    )


def preset_counterexample(alpha=0.5) -> transportnet.TransportNetwork:
    return transportnet.counterexample_network(alpha)


def build_preset(name: str, **parameters):
    if name not in __all__:
        raise ValueError("Invalid preset name %s, must be one of %s" % (name, __all__))
    return globals()["preset_%s" % name](**parameters)
