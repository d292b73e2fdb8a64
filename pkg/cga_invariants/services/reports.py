"""Turn engine results into pydantic reports, emitted documents and plain-text tables."""

import logging
import time
from dataclasses import dataclass
from fractions import Fraction

from pydantic import BaseModel

from cga_invariants.schemas.algebra import BracketEntry, BracketReport
from cga_invariants.schemas.coeff import CoeffEntry, CoeffTableModel, GammaEntry
from cga_invariants.schemas.common import CheckStatus, DiscrepancyEntry, worst_status
from cga_invariants.schemas.invariants import (
    BenchReport,
    CheckReport,
    CheckVerdict,
    EmitDocument,
    EmitEntry,
    VerificationReport,
)
from cga_invariants.schemas.run import EmitTarget, OutputFormat
from cga_invariants.services import discrepancies
from cga_invariants.services.arith import HalfInt, format_rat
from cga_invariants.services.cga import (
    CENTRAL_SIGN_PRINTED,
    CommutationTable,
    build_generators,
    p_index,
    prolonged_generators,
    verify_commutation_table,
)
from cga_invariants.services.expr_io import field_to_json, parse_expression, rat_to_json, render, render_field
from cga_invariants.services.invariants import (
    ELL_THREE_HALVES,
    Invariant,
    build_tilde_C,
    build_tower_32,
    build_tower_general,
    final_invariants,
    verify_full_annihilation,
    verify_intermediate_lemmas,
)
from cga_invariants.services.treecoef import build_coeff_table

logger = logging.getLogger(__name__)

ELL_FIVE_HALVES = HalfInt(5)


def to_json(model: BaseModel) -> str:
    return model.model_dump_json(indent=2) + "\n"


def _rat_map(values: dict[str, Fraction]) -> dict[str, str]:
    return {name: format_rat(value) for name, value in values.items()}


# Commutation table


def _central_text(table: CommutationTable) -> str:
    central = [check for check in table.checks if check.central]
    if not central:
        return f"central sign {table.central_sign}"
    check = central[0]
    coefficient = (check.decomposition or {}).get("M", Fraction(0))
    return f"[{check.first}, {check.second}] = {format_rat(coefficient)} M (sign {table.central_sign})"


def bracket_report(ell: HalfInt, central_sign: int | None = None) -> BracketReport:
    """Commutation table with the central sign and the printed-list comparison."""
    table = verify_commutation_table(ell, central_sign)
    entries = [
        BracketEntry(
            first=check.first,
            second=check.second,
            computed=render_field(check.computed),
            expected=_rat_map(check.expected),
            decomposition=_rat_map(check.decomposition) if check.decomposition is not None else None,
            match=check.match,
            central=check.central,
        )
        for check in table.checks
    ]
    found: list[DiscrepancyEntry] = []
    if table.central_sign != CENTRAL_SIGN_PRINTED:
        found.append(discrepancies.record("central_sign", _central_text(table)))
    if ell == ELL_FIVE_HALVES:
        computed = build_generators(ell).P[5]
        if not (discrepancies.printed_example_translations()[5] - computed).is_zero:
            found.append(discrepancies.record("example_p5", render_field(computed)))

    status = CheckStatus.PASS if table.all_match else CheckStatus.FAIL
    return BracketReport(
        ell=str(ell),
        central_sign=table.central_sign,
        central_sign_printed=CENTRAL_SIGN_PRINTED,
        status=worst_status([status] + [d.status for d in found]),
        entries=entries,
        discrepancies=found,
    )


# Invariants


def verification_report(ell: HalfInt, parallelism: int = 1) -> VerificationReport:
    annihilation = verify_full_annihilation(ell, parallelism)
    lemmas = verify_intermediate_lemmas(ell)
    return VerificationReport(
        ell=str(ell),
        status=worst_status([annihilation.status, lemmas.status]),
        annihilation=annihilation,
        lemmas=lemmas,
    )


# Coefficients


def coeff_table_model(ell: HalfInt) -> CoeffTableModel:
    table = build_coeff_table(ell)
    return CoeffTableModel(
        ell=str(ell),
        c=[
            CoeffEntry(k=k, m=m, a=a, b=b, value=format_rat(value))
            for (k, m, a, b), value in sorted(table.c.items())
        ],
        gamma=[
            GammaEntry(k=k, m=m, value=format_rat(value)) for (k, m), value in sorted(table.gamma.items())
        ],
    )


# Emission


@dataclass(frozen=True)
class NamedExpression:
    """An expression to emit. ``symbolic`` replaces the expanded body in text and LaTeX."""

    name: str
    latex_name: str
    value: Invariant
    symbolic: tuple[str, str] | None = None


def _pair_latex(k: int, m: int) -> str:
    return f"{k}{m}" if k <= 9 and m <= 9 else f"{k},{m}"


def _pair_text(k: int, m: int) -> str:
    return f"{k}{m}" if k <= 9 and m <= 9 else f"{k}_{m}"


def _generator_latex(name: str) -> str:
    n = p_index(name)
    return name if n is None else f"P^{{({n})}}"


def named_expressions(ell: HalfInt, target: EmitTarget) -> list[NamedExpression]:
    """The expressions behind ``emit --what target`` (every target except generators)."""
    if ell == ELL_THREE_HALVES:
        return _named_32(target)
    tower = build_tower_general(ell)
    match target:
        case EmitTarget.PHI:
            out = [
                NamedExpression("phi", "\\phi", tower.phi),
                NamedExpression("phi~", "\\tilde{\\phi}", tower.phi_tilde),
                NamedExpression("phi_01", "\\phi_{01}", tower.phi_01),
                NamedExpression("phi_02", "\\phi_{02}", tower.phi_02),
            ]
            for (k, m), poly in sorted(tower.phi_km.items()):
                out.append(NamedExpression(f"phi_{_pair_text(k, m)}", f"\\phi_{{{_pair_latex(k, m)}}}", poly))
            return out
        case EmitTarget.W:
            out = [
                NamedExpression("w", "w", tower.w),
                NamedExpression("w_01", "w_{01}", tower.w_01),
                NamedExpression("w_02", "w_{02}", tower.w_02),
            ]
            for (k, m), poly in sorted(tower.w_km.items()):
                out.append(NamedExpression(f"w_{_pair_text(k, m)}", f"w_{{{_pair_latex(k, m)}}}", poly))
            return out
        case EmitTarget.WKM:
            return [
                NamedExpression(f"w_{_pair_text(k, m)}", f"w_{{{_pair_latex(k, m)}}}", poly)
                for (k, m), poly in sorted(tower.w_km_phi.items())
            ]
        case EmitTarget.FINAL:
            out = []
            for (k, m), expr in sorted(tower.final.items()):
                power = tower.exponent(k, m)
                text = f"w_{_pair_text(k, m)}/w^{power}"
                latex = f"\\frac{{w_{{{_pair_latex(k, m)}}}}}{{w^{{{power}}}}}"
                out.append(NamedExpression(text, latex, expr, symbolic=(text, latex)))
            return out
    raise ValueError(f"Target {target.value} has no named expressions")


def _named_32(target: EmitTarget) -> list[NamedExpression]:
    tower = build_tower_32()
    match target:
        case EmitTarget.PHI:
            return [NamedExpression(f"phi_{i}", f"\\phi_{{{i}}}", p) for i, p in tower.phi.items()]
        case EmitTarget.W:
            return [NamedExpression(f"w_{i}", f"w_{{{i}}}", p) for i, p in tower.w.items()]
        case EmitTarget.FINAL:
            return [NamedExpression(f"psi_{i}", f"\\psi_{{{i}}}", e) for i, e in tower.psi.items()]
        case EmitTarget.WKM:
            raise ValueError("w_km exist for ell >= 5/2 only; use --what w at ell = 3/2")
    raise ValueError(f"Target {target.value} has no named expressions")


def emit_document(ell: HalfInt, target: EmitTarget, fmt: OutputFormat) -> str:
    """
    Render ``target`` deterministically.

    Args:
        ell: Half-integer label of the algebra
        target: What to emit
        fmt: Output format

    Returns:
        One line per item for text and LaTeX, or one JSON document

    Raises:
        ValueError: If the target does not exist at this ell (wkm at 3/2)
    """
    if target == EmitTarget.GENERATORS:
        fields = list(build_generators(ell).items())
        if fmt == OutputFormat.JSON:
            entries = [EmitEntry(name=name, value=field_to_json(vf)) for name, vf in fields]
            return to_json(EmitDocument(ell=str(ell), target=target.value, entries=entries))
        if fmt == OutputFormat.LATEX:
            lines = [f"{_generator_latex(name)} = {render_field(vf, fmt)}" for name, vf in fields]
        else:
            lines = [f"{name} = {render_field(vf, fmt)}" for name, vf in fields]
        return "\n".join(lines) + "\n"

    named = named_expressions(ell, target)
    if fmt == OutputFormat.JSON:
        entries = [EmitEntry(name=item.name, value=rat_to_json(item.value)) for item in named]
        return to_json(EmitDocument(ell=str(ell), target=target.value, entries=entries))
    lines = []
    for item in named:
        if item.symbolic is not None:
            lines.append(item.symbolic[1] if fmt == OutputFormat.LATEX else item.symbolic[0])
            continue
        label = item.latex_name if fmt == OutputFormat.LATEX else item.name
        lines.append(f"{label} = {render(item.value, fmt)}")
    return "\n".join(lines) + "\n"


# Candidate check


def check_expression(text: str, ell: HalfInt) -> CheckReport:
    """
    Apply every prolonged generator, and C~, to a parsed candidate.

    Args:
        text: Expression in the text grammar
        ell: Half-integer label of the algebra

    Returns:
        One verdict per operator, in generator order with C~ last

    Raises:
        ParseError: If the text is malformed
    """
    expr = parse_expression(text, ell)
    operators = dict(prolonged_generators(ell))
    operators["C~"] = build_tilde_C(ell)
    verdicts = [
        CheckVerdict(generator=name, annihilated=operator.annihilates(expr))
        for name, operator in operators.items()
    ]
    logger.info(f"Checked candidate at ell={ell}: {sum(v.annihilated for v in verdicts)} annihilators")
    return CheckReport(ell=str(ell), expression=render(expr), verdicts=verdicts)


# Bench


def run_bench(ell: HalfInt, parallelism: int = 1, memory_limit_mb: int = 0) -> BenchReport:
    """Time each construction phase and the full annihilation run."""
    timings: dict[str, float] = {}

    start = time.perf_counter()
    prolonged_generators(ell)
    timings["generators"] = time.perf_counter() - start

    start = time.perf_counter()
    build_coeff_table(ell)
    timings["coefficients"] = time.perf_counter() - start

    start = time.perf_counter()
    invariants = final_invariants(ell)
    timings["tower"] = time.perf_counter() - start

    start = time.perf_counter()
    report = verify_full_annihilation(ell, parallelism)
    timings["annihilation"] = time.perf_counter() - start

    peak = max((entry.peak_terms for entry in report.entries), default=0)
    logger.info(f"Bench at ell={ell}: {sum(timings.values()):.2f}s, peak {peak} terms")
    return BenchReport(
        ell=str(ell),
        timings=timings,
        peak_terms=peak,
        invariant_count=len(invariants),
        status=report.status,
        memory_limit_mb=memory_limit_mb,
    )


# Text tables


def _combination(values: dict[str, str]) -> str:
    if not values:
        return "0"
    return " + ".join(name if value == "1" else f"{value}*{name}" for name, value in values.items())


def _discrepancy_lines(found: list[DiscrepancyEntry]) -> list[str]:
    lines = []
    for entry in found:
        lines.append(f"{entry.status.value}  {entry.key}: {entry.subject}")
        lines.append(f"      printed:  {entry.printed}")
        lines.append(f"      computed: {entry.computed}")
        lines.append(f"      using:    {entry.resolution}")
    return lines


def format_bracket_report(report: BracketReport) -> str:
    lines = [
        f"ell = {report.ell}: {len(report.entries)} brackets, "
        f"central sign {report.central_sign:+d} (printed {report.central_sign_printed:+d})"
    ]
    for entry in report.entries:
        status = "PASS" if entry.match else "FAIL"
        lines.append(f"{status}  [{entry.first}, {entry.second}] = {_combination(entry.expected)}")
        if not entry.match:
            lines.append(f"      computed: {entry.computed}")
    lines.extend(_discrepancy_lines(report.discrepancies))
    lines.append(f"status: {report.status.value}")
    return "\n".join(lines) + "\n"


def format_verification(report: VerificationReport) -> str:
    annihilation, lemmas = report.annihilation, report.lemmas
    total = len(annihilation.entries)
    passed = total - len(annihilation.failures)
    lines = [
        f"ell = {annihilation.ell}: {len(annihilation.invariants)} invariants "
        f"(expected {annihilation.argument_count}), {len(annihilation.generators)} generators",
        f"{annihilation.status.value}  annihilation {passed}/{total}",
    ]
    for entry in annihilation.failures:
        lines.append(f"      {entry.generator} does not annihilate {entry.invariant}")
    for check in lemmas.checks:
        detail = f" ({check.detail})" if check.detail else ""
        lines.append(f"{check.status.value}  {check.name}{detail}")
    lines.extend(_discrepancy_lines(lemmas.discrepancies))
    lines.append(f"status: {report.status.value}")
    return "\n".join(lines) + "\n"


def format_coeff_table(model: CoeffTableModel) -> str:
    lines = [f"ell = {model.ell}"]
    for entry in model.c:
        lines.append(f"c_{entry.a}{entry.b}({entry.k},{entry.m}) = {entry.value}")
    for gamma in model.gamma:
        lines.append(f"gamma({gamma.k},{gamma.m}) = {gamma.value}")
    return "\n".join(lines) + "\n"


def format_check_report(report: CheckReport) -> str:
    lines = [f"ell = {report.ell}: {report.expression}"]
    for verdict in report.verdicts:
        lines.append(f"{verdict.generator:<4} {'yes' if verdict.annihilated else 'no'}")
    return "\n".join(lines) + "\n"


def format_bench_report(report: BenchReport) -> str:
    lines = [f"ell = {report.ell}"]
    for phase, seconds in report.timings.items():
        lines.append(f"{phase:<13} {seconds:.3f}s")
    lines.append(f"peak terms    {report.peak_terms}")
    lines.append(f"invariants    {report.invariant_count}")
    lines.append(f"status: {report.status.value}")
    return "\n".join(lines) + "\n"
