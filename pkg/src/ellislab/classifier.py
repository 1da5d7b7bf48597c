"""Decide the size of the structure group from computed invariants.

Rules, applied in order:

R0  hypotheses: primitive, aperiodic, trivial height (else UNDETERMINED).
R1  coincidence rank 1 -> SMALL; the structure group is E(X_max) = Z_ell.
R2  proximal relation certified non-transitive on a modelled fibre and the
    singular difference group certified not open -> HUGE.
R3  otherwise UNDETERMINED, naming the hypothesis that failed.

Cardinality labels are strings; nothing transfinite is computed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from . import __version__
from .ellismodel import (
    DEFAULT_LEVEL, DigitStream, FiberKernel, SingularClassification, classify_singular,
    fiber, fiber_kernel_structure, integer_fiber_semigroup,
)
from .finsemi import kernel, structure_groups
from .substitution import (
    ColumnData, Substitution, SubstitutionInvariants, column_maps, format_substitution,
    invariants, substitution_report,
)

CITATIONS = {
    "R0": "standing hypotheses: minimal Z-subshift of a primitive aperiodic constant-length "
          "substitution with trivial height, so X_max is the ell-adic odometer",
    "R1": "small-structure-group theorem: if the proximal relation agrees with the "
          "equicontinuous structure relation (cr = 1), the structure group is isomorphic "
          "to E(X_max)",
    "R1-lemma": "cr = 1 iff the proximal relation agrees with the equicontinuous "
                "structure relation",
    "R2": "huge-structure-group theorem: proximal relation not transitive and "
          "X_max / L^sing uncountable => card(H) = 2^c",
    "R2-trans": "proximal relation transitive iff the little structure group is trivial "
                "(non-orthodox kernel <=> nontrivial little structure group)",
    "R2-countable": "only countably many singular points in an uncountable X_max => "
                    "L^sing not open",
    "function-group": "bijective substitution with trivial height: H is the group of all functions "
          "Z_ell/Z -> G_theta with pointwise product",
    "R3": "no rule applies; the gap between the two theorems is left open",
}

SMALL, HUGE, UNDETERMINED = "SMALL", "HUGE", "UNDETERMINED"


@dataclass
class GammaEvidence:
    """Little-structure-group evidence on the two-sided fibre over 0."""

    gamma_trivial: bool | None
    fiber_points: list[str]
    non_orthodox_witness: tuple[str, str] | None = None
    non_transitive_witness: tuple[str, str, str] | None = None
    fiber_semigroup_size: int | None = None
    gamma_order: int | None = None
    certified: bool = False

    def to_json(self) -> dict:
        return {
            "gamma_trivial": self.gamma_trivial,
            "fiber": "xi = 0 (two-sided)",
            "fiber_points": self.fiber_points,
            "fiber_semigroup_size": self.fiber_semigroup_size,
            "gamma_order": self.gamma_order,
            "non_orthodox_witness": list(self.non_orthodox_witness) if self.non_orthodox_witness else None,
            "non_transitive_witness": list(self.non_transitive_witness) if self.non_transitive_witness else None,
            "certified": self.certified,
        }


def gamma_evidence(theta: Substitution, N: int = DEFAULT_LEVEL) -> GammaEvidence:
    fz = fiber(theta, DigitStream.zero(theta.length), N)
    labels = [fz.point_label(i) for i in range(len(fz.points))]
    points, S = integer_fiber_semigroup(theta, fz.points)
    witness = fz.non_transitive_witness()
    nt = tuple(labels[i] for i in witness) if witness else None
    if S is None:
        trivial = True if fz.transitive else None
        return GammaEvidence(trivial, labels, None, nt, certified=fz.fully_certified)
    ideals = kernel(S)
    groups = structure_groups(S, ideals=ideals)

    def show(idx):
        return "[" + ",".join(labels[v] for v in S.elements[idx].images) + "]"

    now = (show(groups.witness[0]), show(groups.witness[1])) if groups.witness else None
    if not groups.gamma_trivial and nt is not None:
        trivial = False
    elif groups.gamma_trivial and fz.transitive:
        trivial = True
    else:
        trivial = None
    return GammaEvidence(trivial, labels, now, nt, len(S), len(groups.Gamma_e),
                         certified=nt is not None or fz.transitive)


@dataclass
class RuleStep:
    rule: str
    fired: bool
    citation: str
    detail: str

    def to_json(self) -> dict:
        return {"rule": self.rule, "fired": self.fired, "citation": self.citation, "detail": self.detail}


@dataclass
class AnalysisReport:
    substitution: Substitution
    columns: ColumnData
    invariants: SubstitutionInvariants
    gamma: GammaEvidence
    singular: SingularClassification
    kernel_structure: FiberKernel
    verdict: str
    verdict_detail: str
    rule_trace: list[RuleStep] = field(default_factory=list)
    function_group_form: dict | None = None
    cr_witness: dict | None = None

    def classifier_fields(self) -> dict:
        """The fields the decision depends on."""
        inv = self.invariants
        return {
            "primitive": inv.primitive,
            "aperiodic": inv.aperiodic,
            "height": inv.height,
            "coincidence_rank": inv.coincidence_rank,
            "gamma_trivial": self.gamma.gamma_trivial,
            "lsing_open": self.singular.lsing_open,
            "verdict": self.verdict,
            "fired": [s.rule for s in self.rule_trace if s.fired],
        }

    def to_json(self) -> dict:
        ks = self.kernel_structure
        out = {
            "tool": {"name": "ellislab", "version": __version__},
            "verdict": self.verdict,
            "verdict_detail": self.verdict_detail,
            "rule_trace": [s.to_json() for s in self.rule_trace],
            "evidence": {
                "substitution": format_substitution(self.substitution),
                "invariants": substitution_report(self.substitution, self.columns, self.invariants),
                "column_kernel": {
                    "kernel_size": len(ks.ideals.kernel),
                    "I": len(ks.rees.I),
                    "Lambda": len(ks.rees.Lambda),
                    "H": len(ks.rees.H),
                    "gamma": len(ks.groups.Gamma_e),
                    "orthodox": ks.groups.orthodox,
                },
                "gamma_on_fibers": self.gamma.to_json(),
                "singular": self.singular.to_json(),
                "cr_witness": self.cr_witness,
                "tameness": "not decided",
            },
        }
        if self.function_group_form is not None:
            out["function_group_form"] = self.function_group_form
        return out


def _cr_witness(columns: ColumnData) -> dict:
    """A minimal-rank element of the column semigroup and a column word for it."""
    S = columns.column_semigroup
    best = min(range(len(S)), key=lambda i: (S.elements[i].rank, i))
    word = S.word(best)  # generator positions are column indices
    return {
        "element": list(S.elements[best].images),
        "rank": S.elements[best].rank,
        "column_word": word,
        "reading": " o ".join(f"c{w}" for w in word),
    }


def classify(theta: Substitution, columns: ColumnData, inv: SubstitutionInvariants,
             gamma: GammaEvidence, singular: SingularClassification,
             kernel_structure: FiberKernel) -> AnalysisReport:
    trace: list[RuleStep] = []
    fg_form = None
    witness = _cr_witness(columns)

    def report(verdict, detail):
        return AnalysisReport(theta, columns, inv, gamma, singular, kernel_structure,
                              verdict, detail, trace, fg_form, witness)

    failed = [name for name, ok in (("primitive", inv.primitive), ("aperiodic", inv.aperiodic),
                                    ("trivial height", inv.height == 1)) if not ok]
    trace.append(RuleStep("R0", bool(failed), CITATIONS["R0"],
                          "hypotheses hold" if not failed else "failed: " + ", ".join(failed)))
    if failed:
        return report(UNDETERMINED, "hypothesis failed: " + ", ".join(failed))

    ell = theta.length
    if columns.bijective:
        fg_form = {
            "description": f"H = all functions Z_{ell}/Z -> G_theta (pointwise product)",
            "G_theta_order": columns.column_group_order,
            "citation": CITATIONS["function-group"],
        }

    if inv.coincidence_rank == 1:
        if gamma.gamma_trivial is False:
            raise AssertionError("cr = 1 but the little structure group is nontrivial on a fibre")
        trace.append(RuleStep(
            "R1", True, CITATIONS["R1"] + "; " + CITATIONS["R1-lemma"],
            f"cr = 1, witnessed by rank-1 column composition {witness['element']} "
            f"({witness['reading']}); H = E(X_max) = Z_{ell}"))
        return report(SMALL, f"card(H) <= c; H = E(X_max) = Z_{ell}")
    trace.append(RuleStep("R1", False, CITATIONS["R1"], f"cr = {inv.coincidence_rank} != 1"))

    nontransitive = gamma.gamma_trivial is False
    not_open = singular.lsing_open is False
    detail = (f"non-orthodox witness {gamma.non_orthodox_witness}, non-transitive triple "
              f"{gamma.non_transitive_witness}; singular set {singular.singular_set_descriptor}, "
              f"L^sing {singular.lsing_descriptor}")
    if nontransitive and not_open:
        trace.append(RuleStep("R2", True, "; ".join(CITATIONS[k] for k in ("R2", "R2-trans", "R2-countable")),
                              detail))
        return report(HUGE, "card(H) = 2^c")
    missing = []
    if not nontransitive:
        missing.append("proximal relation not transitive (little structure group nontrivial on a fibre)")
    if not not_open:
        missing.append("X_max / L^sing uncountable (L^sing not open)")
    trace.append(RuleStep("R2", False, CITATIONS["R2"], "could not certify: " + "; ".join(missing)))
    trace.append(RuleStep("R3", True, CITATIONS["R3"], "R2 premises not certified: " + "; ".join(missing)))
    return report(UNDETERMINED, "R2 premises not certified: " + "; ".join(missing))


def analyze(theta: Substitution, level: int = DEFAULT_LEVEL, samples: int = 32, seed: int = 0,
            cap: int = 100_000) -> AnalysisReport:
    columns = column_maps(theta, cap=cap)
    inv = invariants(theta, columns)
    ks = fiber_kernel_structure(theta, columns)
    gamma = gamma_evidence(theta, level)
    if inv.primitive and inv.aperiodic:
        singular = classify_singular(theta, samples, level, seed, columns)
    else:
        singular = SingularClassification("Other", False, "not determined", None,
                                          "hypotheses failed; fibres not sampled")
    return classify(theta, columns, inv, gamma, singular, ks)


def explain(report: AnalysisReport) -> str:
    inv = report.invariants
    lines = [
        f"substitution: {format_substitution(report.substitution).strip().replace(chr(10), ' | ')}",
        f"length {report.substitution.length}, alphabet size {report.substitution.size}, "
        f"bijective {report.columns.bijective}"
        + (f", |G_theta| = {report.columns.column_group_order}" if report.columns.bijective else ""),
        f"primitive {inv.primitive}, aperiodic {inv.aperiodic}, height {inv.height}, "
        f"coincidence rank {inv.coincidence_rank}",
        "",
        "rule trace:",
    ]
    for step in report.rule_trace:
        mark = "fired" if step.fired else "skipped"
        lines.append(f"  {step.rule} [{mark}] {step.detail}")
        lines.append(f"      cites: {step.citation}")
    lines.append("")
    lines.append(f"verdict: {report.verdict} ({report.verdict_detail})")
    if report.function_group_form:
        lines.append(f"structure group form: {report.function_group_form['description']}, "
                     f"|G_theta| = {report.function_group_form['G_theta_order']}")
    lines.append("tameness: not decided")
    return "\n".join(lines) + "\n"
