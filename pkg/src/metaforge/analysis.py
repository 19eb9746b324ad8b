"""Assemble per-group analysis tables: effects, pooling, dotplots.

This is the single source for every number the service and CLI emit.
Each study group becomes one table: rows carry the per-result effect,
its 20-quantile dotplot, and flag notes; groups marked for pooling get
a bottom row with the random-effects summary under the current
inclusion mask.
"""

from __future__ import annotations

import math

from . import core_model, dotplot, meta_engine
from .core_model import Project, StudyResult
from .effect_size import (
    ContinuousArm,
    DichotomousArm,
    EffectEstimate,
    log_odds_ratio,
    mean_difference,
    risk_difference,
    standardized_mean_change,
    standardized_mean_difference,
    to_original_units,
    MD,
    RD,
    LN_OR,
)
from .errors import EmptyGroupError, IncompatibleKindsError, NotFoundError, ValidationError

SORT_MODES = ("none", "effect")
UNITS_MODES = ("standardized", "original")


def estimate_for_result(result: StudyResult) -> EffectEstimate:
    """Derive the effect estimate from a result's stored arm statistics."""
    d = result.data
    if result.design == "between_subjects" and result.outcome_kind == "continuous":
        t = ContinuousArm(d["t_mean"], d["t_sd"], d["t_n"])
        c = ContinuousArm(d["c_mean"], d["c_sd"], d["c_n"])
        if result.effect_kind == MD:
            return mean_difference(t, c, units=result.units)
        return standardized_mean_difference(t, c, units=result.units)
    if result.outcome_kind == "dichotomous":
        t = DichotomousArm(d["t_events"], d["t_n"])
        c = DichotomousArm(d["c_events"], d["c_n"])
        if result.effect_kind == RD:
            return risk_difference(t, c)
        return log_odds_ratio(t, c)
    return standardized_mean_change(
        d["mean_pre"], d["mean_post"], d["sd_pre"], d["n"], d.get("r_prepost"),
        units=result.units)


def _arm_summary(result: StudyResult) -> str:
    d = result.data
    if result.design == "within_subjects":
        r = d.get("r_prepost")
        r_txt = "r=?" if r is None else f"r={r:g}"
        return (f"pre {d['mean_pre']:g} / post {d['mean_post']:g} "
                f"(sd {d['sd_pre']:g}, n={d['n']}, {r_txt})")
    if result.outcome_kind == "dichotomous":
        return (f"t {d['t_events']}/{d['t_n']}; c {d['c_events']}/{d['c_n']}")
    return (f"t {d['t_mean']:g} (sd {d['t_sd']:g}, n={d['t_n']}); "
            f"c {d['c_mean']:g} (sd {d['c_sd']:g}, n={d['c_n']})")


def _row_base(project: Project, rid: str, flags: dict) -> dict:
    doc, res = core_model.result_by_id(project, rid)
    est = estimate_for_result(res)
    warnings = []
    if not est.pooled_eligible:
        warnings.append("zero sampling variance; excluded from pooling")
    if est.correction_applied and not est.correction_applied.startswith("zero sampling"):
        warnings.append(est.correction_applied)
    return {
        "result_id": rid,
        "document_id": doc.id,
        "citation": doc.citation.label(),
        "timepoint": res.label,
        "arm_summary": _arm_summary(res),
        "arms": dict(res.data),
        "effect": est.to_dict(),
        "flag": {"note": flags[rid]} if rid in flags else None,
        "warnings": warnings,
        "_estimate": est,
    }


def _sorted_rows(rows: list[dict], sort: str) -> list[dict]:
    if sort == "effect":
        # Python's sort is stable, and rows arrive in id-creation order,
        # so ties keep id order.
        return sorted(rows, key=lambda r: r["effect"]["y"])
    return rows


def build_group_table(project: Project, group: core_model.StudyGroup,
                      flags: dict, excluded_ids: set, sort: str, units: str) -> dict:
    rows = [_row_base(project, rid, flags) for rid in group.member_ids]
    for row in rows:
        est: EffectEstimate = row["_estimate"]
        row["included"] = (row["result_id"] not in excluded_ids) and est.pooled_eligible

    # Pool over the included subset of pooled-eligible rows.
    pooled = None
    pooled_note = None
    estimates = [
        meta_engine.StudyEstimate(result_id=r["result_id"], y=r["_estimate"].y,
                                  v=r["_estimate"].v, kind=r["_estimate"].kind)
        for r in rows if r["_estimate"].pooled_eligible
    ]
    mask = [e.result_id not in excluded_ids for e in estimates]
    if not group.meta_analyzed:
        pooled_note = "shown without pooling"
    elif not rows:
        pooled_note = "no results in this group"
    else:
        try:
            pooled = meta_engine.pool_with_inclusion(estimates, mask)
        except EmptyGroupError:
            pooled_note = "every result is excluded; nothing to pool"
        except IncompatibleKindsError as exc:
            pooled_note = str(exc)

    # Dotplots: shared axis over every row (and the pooled row) in
    # standardized units; independent per-row axes in original units.
    quantile_sets = {}
    for row in rows:
        est = row["_estimate"]
        if est.pooled_eligible:
            quantile_sets[row["result_id"]] = dotplot.sampling_quantiles(
                est.y, math.sqrt(est.v))
    pooled_quantiles = None
    if pooled is not None:
        pooled_quantiles = dotplot.sampling_quantiles(pooled.mu, pooled.se)

    axis = None
    all_sets = list(quantile_sets.values()) + (
        [pooled_quantiles] if pooled_quantiles else [])
    if all_sets:
        axis = dotplot.shared_axis(all_sets)

    for row in rows:
        qs = quantile_sets.get(row["result_id"])
        row["dotplot"] = dotplot.layout_dots(qs, axis).to_dict() if qs else None
        if units == "original":
            rec = to_original_units(row["_estimate"], row["arms"])
            row["original_units"] = rec
            if rec["convertible"] and rec["v"] > 0:
                oq = dotplot.sampling_quantiles(rec["y"], math.sqrt(rec["v"]))
                row_axis = dotplot.shared_axis([oq])
                row["original_dotplot"] = dotplot.layout_dots(oq, row_axis).to_dict()
            else:
                row["original_dotplot"] = None

    pooled_dict = None
    if pooled is not None:
        pooled_dict = pooled.to_dict()
        if units == "original":
            # The pooled summary always stays in standardized units.
            pooled_axis = dotplot.shared_axis([pooled_quantiles])
        else:
            pooled_axis = axis
        pooled_dict["dotplot"] = dotplot.layout_dots(pooled_quantiles, pooled_axis).to_dict()

    rows = _sorted_rows(rows, sort)
    for row in rows:
        del row["_estimate"]

    return {
        "name": group.name,
        "meta_analyzed": group.meta_analyzed,
        "axis": {"min": axis[0], "max": axis[1]} if axis else None,
        "rows": rows,
        "pooled": pooled_dict,
        "pooled_note": pooled_note,
    }


def build_analysis(project: Project, excluded_ids: set | None = None,
                   sort: str = "none", units: str = "standardized",
                   group_name: str | None = None) -> dict:
    """The full analysis payload served over HTTP and printed by the CLI."""
    if sort not in SORT_MODES:
        raise ValidationError(f"sort must be one of {', '.join(SORT_MODES)}", ids=["sort"])
    if units not in UNITS_MODES:
        raise ValidationError(f"units must be one of {', '.join(UNITS_MODES)}", ids=["units"])
    excluded_ids = set(excluded_ids or ())
    known = {r.id for _, r in core_model.all_results(project)}
    unknown = sorted(excluded_ids - known)
    if unknown:
        raise NotFoundError(f"unknown result ids in mask: {', '.join(unknown)}")

    state = core_model.grouping_state(project)
    groups = project.groups
    if group_name is not None:
        matches = [g for g in groups if g.name == group_name]
        if not matches:
            raise NotFoundError(f"unknown group {group_name!r}")
        groups = matches

    return {
        "question": project.question.text(),
        "revision": project.revision,
        "include_mask": {"excluded": sorted(excluded_ids)},
        "sort": sort,
        "units": units,
        "groups": [build_group_table(project, g, state.flags, excluded_ids, sort, units)
                   for g in groups],
    }
