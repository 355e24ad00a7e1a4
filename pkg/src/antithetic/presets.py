"""Case-study networks and their published parameter sets."""

from dataclasses import asdict, dataclass

from .controller import ClosedLoopConfig, Feedback
from .crn import MassAction, Network, reaction

__all__ = [
    "GeneExpressionParams",
    "MaturationParams",
    "DimerizationParams",
    "GENE",
    "MATURATION",
    "DIMERIZATION",
    "gene_expression",
    "maturation",
    "dimerization",
    "preset",
    "PRESETS",
]


@dataclass(frozen=True)
class GeneExpressionParams:
    k_p: float
    gamma_r: float
    gamma_p: float

    def __post_init__(self):
        if min(asdict(self).values()) <= 0:
            raise ValueError(f"all rates must be positive: {self}")


@dataclass(frozen=True)
class MaturationParams:
    k_p: float
    gamma_r: float
    gamma_p: float
    k_m: float  # maturation X2 -> X3
    gamma_m: float  # mature protein degradation

    def __post_init__(self):
        if min(asdict(self).values()) <= 0:
            raise ValueError(f"all rates must be positive: {self}")


@dataclass(frozen=True)
class DimerizationParams:
    k_p: float
    gamma_r: float
    gamma_p: float
    k_d: float
    gamma_d: float  # dimer dissociation X3 -> 2 X2
    gamma_d2: float  # dimer degradation

    def __post_init__(self):
        if min(asdict(self).values()) <= 0:
            raise ValueError(f"all rates must be positive: {self}")


GENE = GeneExpressionParams(k_p=2.0, gamma_r=2.0, gamma_p=7.0)
MATURATION = MaturationParams(k_p=1.0, gamma_r=2.0, gamma_p=1.0, k_m=3.0, gamma_m=1.0)
DIMERIZATION = DimerizationParams(k_p=1.0, gamma_r=2.0, gamma_p=1.0, k_d=3.0, gamma_d=1.0,
                                  gamma_d2=1.0)

MU, THETA, ETA = 10.0, 2.0, 100.0


def _gene_reactions(sp, p, k_r):
    return [
        reaction(sp, {}, {"X1": 1}, MassAction(k_r), "transcription"),
        reaction(sp, {"X1": 1}, {"X1": 1, "X2": 1}, MassAction(p.k_p), "translation"),
        reaction(sp, {"X1": 1}, {}, MassAction(p.gamma_r), "mRNA degradation"),
        reaction(sp, {"X2": 1}, {}, MassAction(p.gamma_p), "protein degradation"),
    ]


def gene_expression(p=GENE, k_r=0.0):
    """mRNA X1 and protein X2.  ``k_r`` is the basal transcription rate.

    Under closed-loop control transcription comes from the actuation
    reaction, so the basal rate defaults to zero.
    """
    sp = ("X1", "X2")
    return Network(sp, _gene_reactions(sp, p, k_r), name="gene_expression")


def maturation(p=MATURATION, k_r=0.0):
    sp = ("X1", "X2", "X3")
    rx = _gene_reactions(sp, p, k_r) + [
        reaction(sp, {"X2": 1}, {"X3": 1}, MassAction(p.k_m), "maturation"),
        reaction(sp, {"X3": 1}, {}, MassAction(p.gamma_m), "mature degradation"),
    ]
    return Network(sp, rx, name="maturation")


def dimerization(p=DIMERIZATION, k_r=0.0):
    sp = ("X1", "X2", "X3")
    rx = _gene_reactions(sp, p, k_r) + [
        reaction(sp, {"X2": 2}, {"X3": 1}, MassAction(p.k_d), "dimerization"),
        reaction(sp, {"X3": 1}, {"X2": 2}, MassAction(p.gamma_d), "dissociation"),
        reaction(sp, {"X3": 1}, {}, MassAction(p.gamma_d2), "dimer degradation"),
    ]
    return Network(sp, rx, name="dimerization")


def _config(controlled, k, feedback, Kp):
    fb = Feedback(feedback, Kp) if feedback else None
    return ClosedLoopConfig(mu=MU, theta=THETA, eta=ETA, k=k, controlled=controlled,
                            actuated=0, feedback=fb)


PRESETS = {
    "gene": (gene_expression, GENE, 1),
    "maturation": (maturation, MATURATION, 2),
    "dimerization": (dimerization, DIMERIZATION, 2),
}


def preset(name, k=3.0, feedback=None, Kp=0.0):
    """Open-loop network and controller config for a named case study."""
    try:
        build, params, controlled = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return build(params), _config(controlled, k, feedback, Kp)
