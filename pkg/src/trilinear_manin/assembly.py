"""Assembly of the leading constant and comparison with exact counts.

Two normalisations appear.  Integer triples with |x| |y| |z| <= B are predicted
by n^2/2 sigma B^n log^2 B.  The projective count for the anticanonical height
is C(V) B log^2 B with C(V) = alpha(V) beta(V) tau_inf prod tau_p = sigma'/16.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .arith import fraction_from_json, fraction_to_json
from .enumeration import CountVariant, count_height, scaled_projective_count
from .expsums import singular_series_trunc
from .form import TrilinearForm
from .local import euler_product, sigma_infinity, tamagawa_inf

IDENTITY_TOL = 1e-12


def alpha_V(n: int) -> Fraction:
    """Effective-cone constant 1/(2 n^3) of this family."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return Fraction(1, 2 * n**3)


def beta_V() -> int:
    """Galois cohomology factor; the Picard group is split here."""
    return 1


@dataclass
class PredictionReport:
    n: int
    form_id: str
    J: float
    J_stderr: float
    J_method: str
    J_sinc: Optional[tuple] = None  # (estimate, stderr) at phi, when computed
    euler: Fraction = Fraction(1)  # prod_{p <= pmax} sigma_p (last computed terms)
    moebius_factor: Fraction = Fraction(1)  # prod_{p <= pmax} (1 - p^-n)^3
    series: Optional[Fraction] = None  # Dirichlet-series truncation S(Q)
    series_tail: Optional[float] = None
    euler_tail: float = 0.0
    sigma_p: dict = field(default_factory=dict)  # p -> (r, value)
    tau_p: dict = field(default_factory=dict)  # p -> exact rational
    alphaV: Fraction = Fraction(1)
    betaV: int = 1
    tau_inf: float = 0.0
    sigma: float = 0.0
    sigma_prime: float = 0.0
    C_V: float = 0.0  # alpha beta tau_inf prod tau_p
    C_V_alt: float = 0.0  # J prod sigma_p prod (1 - p^-n)^3 / 16
    identity_residual: float = 0.0
    bridge: dict = field(default_factory=dict)
    truncations: dict = field(default_factory=dict)
    comparisons: list = field(default_factory=list)

    def to_json(self) -> dict:
        fj = fraction_to_json
        return {
            "n": self.n,
            "form_id": self.form_id,
            "J": self.J,
            "J_stderr": self.J_stderr,
            "J_method": self.J_method,
            "J_sinc": list(self.J_sinc) if self.J_sinc else None,
            "euler": fj(self.euler),
            "moebius_factor": fj(self.moebius_factor),
            "series": fj(self.series) if self.series is not None else None,
            "series_tail": self.series_tail,
            "euler_tail": self.euler_tail,
            "sigma_p": {str(p): {"r": r, "value": fj(v)} for p, (r, v) in self.sigma_p.items()},
            "tau_p": {str(p): fj(v) for p, v in self.tau_p.items()},
            "alphaV": fj(self.alphaV),
            "betaV": self.betaV,
            "tau_inf": self.tau_inf,
            "sigma": self.sigma,
            "sigma_prime": self.sigma_prime,
            "C_V": self.C_V,
            "C_V_alt": self.C_V_alt,
            "identity_residual": self.identity_residual,
            "bridge": {k: fj(v) if isinstance(v, Fraction) else v for k, v in self.bridge.items()},
            "truncations": self.truncations,
            "comparisons": [
                {k: fj(v) if isinstance(v, Fraction) else v for k, v in c.items()} for c in self.comparisons
            ],
        }

    @classmethod
    def from_json(cls, d: dict) -> "PredictionReport":
        def frac_or(v):
            return fraction_from_json(v) if isinstance(v, dict) and "num" in v else v

        return cls(
            n=d["n"],
            form_id=d["form_id"],
            J=d["J"],
            J_stderr=d["J_stderr"],
            J_method=d["J_method"],
            J_sinc=tuple(d["J_sinc"]) if d.get("J_sinc") else None,
            euler=fraction_from_json(d["euler"]),
            moebius_factor=fraction_from_json(d["moebius_factor"]),
            series=fraction_from_json(d["series"]) if d.get("series") else None,
            series_tail=d.get("series_tail"),
            euler_tail=d["euler_tail"],
            sigma_p={int(p): (v["r"], fraction_from_json(v["value"])) for p, v in d["sigma_p"].items()},
            tau_p={int(p): fraction_from_json(v) for p, v in d["tau_p"].items()},
            alphaV=fraction_from_json(d["alphaV"]),
            betaV=d["betaV"],
            tau_inf=d["tau_inf"],
            sigma=d["sigma"],
            sigma_prime=d["sigma_prime"],
            C_V=d["C_V"],
            C_V_alt=d["C_V_alt"],
            identity_residual=d["identity_residual"],
            bridge={k: frac_or(v) for k, v in d["bridge"].items()},
            truncations=d["truncations"],
            comparisons=[{k: frac_or(v) for k, v in c.items()} for c in d["comparisons"]],
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def assemble(form: TrilinearForm, pmax: int = 19, phi: Optional[float] = 16.0, samples: int = 1 << 20,
             Q: Optional[int] = None, seed: int = 0, residue_budget: int = 10**6, r_cap: int = 6) -> PredictionReport:
    """Assemble sigma, sigma' and C(V) from truncated local data.

    J is the Leray fibre estimate of sigma_infinity; with ``phi`` the sinc
    estimate J(phi) is recorded alongside.  With ``Q`` the Dirichlet-series
    truncation S(Q) is reported next to the Euler product.
    """
    if pmax < 2:
        raise ValueError("pmax must be >= 2")
    n = form.n
    arch = sigma_infinity(form, "both" if phi else "leray-fiber", phi or 16.0, samples, seed)
    J, J_err = arch.leray.value, arch.leray.stderr
    ep = euler_product(form, pmax, residue_budget, r_cap)

    moeb = Fraction(1)
    tau_p = {}
    for d in ep.densities:
        f = (1 - Fraction(1, d.p**n)) ** 3
        moeb *= f
        tau_p[d.p] = f * d.value
    prod_tau = math.prod(float(t) for t in tau_p.values())

    aV, bV = alpha_V(n), beta_V()
    t_inf = tamagawa_inf(form, J)
    C_V = float(aV) * bV * t_inf * prod_tau
    C_V_alt = J * float(ep.value) * float(moeb) / 16
    residual = abs(C_V - C_V_alt) / abs(C_V_alt) if C_V_alt else abs(C_V)
    if residual > IDENTITY_TOL:
        raise ArithmeticError(f"constant decomposition mismatch: relative residual {residual:.3e}")

    sigma = float(ep.value) * J
    rep = PredictionReport(
        n=n, form_id=form.form_id(), J=J, J_stderr=J_err, J_method="leray-fiber",
        J_sinc=(arch.sinc.value, arch.sinc.stderr) if arch.sinc else None,
        euler=ep.value, moebius_factor=moeb, euler_tail=ep.tail_estimate,
        sigma_p={d.p: (d.seq[-1][0], d.value) for d in ep.densities}, tau_p=tau_p,
        alphaV=aV, betaV=bV, tau_inf=t_inf, sigma=sigma, sigma_prime=sigma * float(moeb),
        C_V=C_V, C_V_alt=C_V_alt, identity_residual=residual,
        truncations={"pmax": pmax, "phi": phi, "samples": samples, "Q": Q, "seed": seed,
                     "residue_budget": residue_budget, "r_cap": r_cap},
    )
    if Q:
        st = singular_series_trunc(form, Q)
        rep.series, rep.series_tail = st.partial, st.tail_diagnostic
    rep.bridge = factor_bridge(n, moeb)
    return rep


def factor_bridge(n: int, moebius_factor: Fraction) -> dict:
    """How n^2/2 sigma B^n log^2 B becomes sigma'/16 B log^2 B.

    Primitivity contributes prod (1 - p^-n)^3, identifying +-x, +-y, +-z
    contributes 1/8, and substituting B^{1/n} divides log^2 by n^2.
    """
    affine = Fraction(n * n, 2)
    sign = Fraction(1, 8)
    log_rescale = Fraction(1, n * n)
    return {
        "affine_constant": affine,
        "sign_identification": sign,
        "log_rescaling": log_rescale,
        "moebius_factor": moebius_factor,
        "projective_over_sigma_prime": affine * sign * log_rescale,
    }


def predicted_affine(rep: PredictionReport, B: float) -> float:
    return 0.5 * rep.n**2 * rep.sigma * B**rep.n * math.log(B) ** 2


def predicted_projective(rep: PredictionReport, B: float) -> float:
    return rep.C_V * B * math.log(B) ** 2


def compare_counts(form: TrilinearForm, B_list: Sequence[int], report: PredictionReport,
                   variant=None, workers: Optional[int] = None) -> PredictionReport:
    """Append predicted-vs-observed rows for each B; trend data only."""
    variant = variant or CountVariant.U()
    for B in B_list:
        B = int(B)
        t0 = time.perf_counter()
        aff = count_height(form, B, primitive=False, variant=variant, workers=workers).count
        proj = scaled_projective_count(form, B, variant, workers)
        pa, pp = predicted_affine(report, B), predicted_projective(report, B)
        report.comparisons.append({
            "B": B,
            "affine_observed": aff,
            "affine_predicted": pa,
            "affine_ratio": aff / pa if pa else None,
            "projective_observed": proj,
            "projective_predicted": pp,
            "projective_ratio": float(proj) / pp if pp else None,
            "seconds": time.perf_counter() - t0,
        })
    return report
