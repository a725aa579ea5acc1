"""Built-in benchmark scenarios.

Two plants: a scalar system with a long constant delay and a marginal
certificate around a known gain, and a planar system with a fast-varying
delay (unbounded derivative) stabilized through the synthesized gain.  The
planar system ships with two initial functions (constant and oscillatory).
"""

from .config import ScenarioConfig

EXAMPLE1 = ScenarioConfig(
    name="example1",
    A1=((0.0,),),
    A2=((-0.1,),),
    B=((1.0,),),
    tau="16",
    tau_bar=16.0,
    phi=("1",),
    b=0.1,
    h=0.2,
    alpha=0.09,
    beta=0.11,
    sigma=0.1,
    mode="verify-given-K",
    K=((-0.2,),),
    P=((1.0,),),
    step=0.01,
    horizon=40.0,
)

EXAMPLE2_FIG2 = ScenarioConfig(
    name="example2-fig2",
    A1=((-1.0, -0.5), (3.0, 2.5)),
    A2=((1.2, 2.0), (-0.4, -1.2)),
    B=((1.0,), (1.0,)),
    tau="2 - sin(t^2)",
    tau_bar=3.0,
    phi=("0.1", "1"),
    b=1.1,
    h=0.21,
    alpha=0.1,
    beta=1.0,
    sigma=0.1,
    mode="verify-given-K",
    P=((1.5274, 1.4575), (1.4575, 4.13)),
    R=((-0.8221, -0.7204),),
    step=0.005,
    horizon=20.0,
)

EXAMPLE2_FIG3 = ScenarioConfig(
    name="example2-fig3",
    A1=((-1.0, -0.5), (3.0, 2.5)),
    A2=((1.2, 2.0), (-0.4, -1.2)),
    B=((1.0,), (1.0,)),
    tau="2 - sin(t^2)",
    tau_bar=3.0,
    phi=("-0.15*cos(3*pi*s/2)", "0.12*cos(pi*s)"),
    b=1.1,
    h=0.21,
    alpha=0.1,
    beta=1.0,
    sigma=0.1,
    mode="verify-given-K",
    P=((1.5274, 1.4575), (1.4575, 4.13)),
    R=((-0.8221, -0.7204),),
    step=0.005,
    horizon=20.0,
)

BUILTINS = {
    "example1": EXAMPLE1,
    "example2-fig2": EXAMPLE2_FIG2,
    "example2-fig3": EXAMPLE2_FIG3,
}


def get_scenario(name):
    try:
        return BUILTINS[name]
    except KeyError:
        known = ", ".join(sorted(BUILTINS))
        raise KeyError(f"unknown scenario {name!r}; built-ins: {known}") from None
