"""Analysis payload assembly and SVG rendering."""

import math

import pytest

from conftest import add_complete_doc, full_answers, md_result_row, three_study_project

from metaforge import analysis, core_model as cm, meta_engine, svg_render, triage
from metaforge.errors import NotFoundError, ValidationError


def main_table(payload):
    return next(g for g in payload["groups"] if g["name"] == "main analysis")


class TestBuildAnalysis:
    def test_three_study_pooling(self):
        p, _rids = three_study_project()
        payload = analysis.build_analysis(p)
        pooled = main_table(payload)["pooled"]
        assert pooled["mu"] == pytest.approx(0.4, rel=1e-12)
        assert pooled["se"] == pytest.approx(math.sqrt(1 / 75), rel=1e-12)
        assert pooled["k"] == 3

    def test_engine_equality(self):
        p, rids = three_study_project()
        payload = analysis.build_analysis(p, excluded_ids={rids[2]})
        pooled = main_table(payload)["pooled"]
        estimates = [meta_engine.StudyEstimate(r, y, 0.04)
                     for r, y in zip(rids, (0.2, 0.4, 0.6))]
        direct = meta_engine.pool_with_inclusion(estimates, [True, True, False])
        assert pooled["mu"] == direct.mu
        assert pooled["se"] == direct.se
        assert pooled["tau2"] == direct.tau2
        assert pooled["Q"] == direct.Q
        assert pooled["I2"] == direct.I2

    def test_excluded_rows_marked_but_rendered(self):
        p, rids = three_study_project()
        payload = analysis.build_analysis(p, excluded_ids={rids[0]})
        rows = main_table(payload)["rows"]
        assert [r["included"] for r in rows] == [False, True, True]
        assert all(r["dotplot"] is not None for r in rows)

    def test_unknown_mask_id_rejected(self):
        p, _rids = three_study_project()
        with pytest.raises(NotFoundError):
            analysis.build_analysis(p, excluded_ids={"r99"})

    def test_all_excluded_leaves_note(self):
        p, rids = three_study_project()
        payload = analysis.build_analysis(p, excluded_ids=set(rids))
        table = main_table(payload)
        assert table["pooled"] is None
        assert "excluded" in table["pooled_note"]

    def test_group_without_pooling_flag(self):
        p, rids = three_study_project()
        p = triage.apply_action(p, cm.TriageAction(rids[0], "applicability",
                                                   "show_separately"))
        payload = analysis.build_analysis(p)
        less = next(g for g in payload["groups"]
                    if g["name"] == "less applicable studies")
        assert less["meta_analyzed"] is False
        assert less["pooled"] is None
        assert len(less["rows"]) == 1

    def test_flag_note_carried(self):
        p, rids = three_study_project()
        p = triage.apply_action(p, cm.TriageAction(
            rids[1], "risk_of_bias", "flag", note="baseline concern"))
        payload = analysis.build_analysis(p)
        row = next(r for r in main_table(payload)["rows"]
                   if r["result_id"] == rids[1])
        assert row["flag"]["note"] == "baseline concern"

    def test_group_filter(self):
        p, _rids = three_study_project()
        payload = analysis.build_analysis(p, group_name="main analysis")
        assert [g["name"] for g in payload["groups"]] == ["main analysis"]
        with pytest.raises(NotFoundError):
            analysis.build_analysis(p, group_name="nope")

    def test_dotplot_has_20_dots_and_shared_axis(self):
        p, _rids = three_study_project()
        payload = analysis.build_analysis(p)
        table = main_table(payload)
        axis = table["axis"]
        for row in table["rows"]:
            assert len(row["dotplot"]["dots"]) == 20
            assert row["dotplot"]["axis"] == axis
        assert len(table["pooled"]["dotplot"]["dots"]) == 20


class TestSortAndUnits:
    def test_sort_by_effect(self):
        p = cm.create_project(cm.ResearchQuestion("robots", "mood"))
        for i, y in enumerate((0.6, 0.2, 0.4)):
            p, _doc, _rids = add_complete_doc(
                p, f"A{i}", 2010 + i, f"T{i}",
                full_answers(effect_metric_continuous="MD"), [md_result_row(y)])
        payload = analysis.build_analysis(p, sort="effect")
        ys = [r["effect"]["y"] for r in main_table(payload)["rows"]]
        assert ys == sorted(ys) == [0.2, 0.4, 0.6]

    def test_sort_ties_keep_id_order(self):
        p = cm.create_project(cm.ResearchQuestion("robots", "mood"))
        for i in range(3):
            p, _doc, _rids = add_complete_doc(
                p, f"A{i}", 2010 + i, f"T{i}",
                full_answers(effect_metric_continuous="MD"), [md_result_row(0.4)])
        payload = analysis.build_analysis(p, sort="effect")
        ids = [r["result_id"] for r in main_table(payload)["rows"]]
        assert ids == sorted(ids, key=lambda s: int(s[1:]))

    def test_bad_sort_mode(self):
        p, _rids = three_study_project()
        with pytest.raises(ValidationError):
            analysis.build_analysis(p, sort="reverse")

    def test_original_units_for_smd(self):
        p = cm.create_project(cm.ResearchQuestion("robots", "mood"))
        p, _doc, _rids = add_complete_doc(
            p, "A", 2020, "T", full_answers(),
            [{"label": "post",
              "data": {"t_mean": 10.0, "t_sd": 2.0, "t_n": 20,
                       "c_mean": 8.0, "c_sd": 2.0, "c_n": 20}}])
        payload = analysis.build_analysis(p, units="original")
        row = main_table(payload)["rows"][0]
        assert row["effect"]["kind"] == "SMD_g"
        rec = row["original_units"]
        assert rec["convertible"]
        assert rec["y"] == pytest.approx(2.0)
        assert rec["units"] == "points"
        assert row["original_dotplot"]["axis"] != row["dotplot"]["axis"]
        # pooled row stays standardized
        pooled = main_table(payload)["pooled"]
        assert pooled["mu"] == pytest.approx(0.9801324503311258, abs=1e-9)

    def test_original_units_not_convertible_for_lnor(self):
        p = cm.create_project(cm.ResearchQuestion("robots", "mood"))
        p, _doc, _rids = add_complete_doc(
            p, "A", 2020, "T", full_answers(outcome="dichotomous"),
            [{"label": "post",
              "data": {"t_events": 10, "t_n": 20, "c_events": 5, "c_n": 20}}])
        payload = analysis.build_analysis(p, units="original")
        row = main_table(payload)["rows"][0]
        assert row["original_units"]["convertible"] is False

    def test_zero_variance_row_barred_from_pooling(self):
        p = cm.create_project(cm.ResearchQuestion("robots", "mood"))
        p, _doc, _rids = add_complete_doc(
            p, "A", 2020, "T",
            full_answers(outcome="dichotomous", effect_metric_dichotomous="RD"),
            [{"label": "post",
              "data": {"t_events": 0, "t_n": 20, "c_events": 0, "c_n": 20}}])
        p, _doc2, _r2 = add_complete_doc(
            p, "B", 2021, "T2",
            full_answers(outcome="dichotomous", effect_metric_dichotomous="RD",
                         first_author="B"),
            [{"label": "post",
              "data": {"t_events": 10, "t_n": 20, "c_events": 5, "c_n": 20}}])
        payload = analysis.build_analysis(p)
        rows = main_table(payload)["rows"]
        degenerate = rows[0]
        assert degenerate["included"] is False
        assert degenerate["dotplot"] is None
        assert any("zero sampling variance" in w for w in degenerate["warnings"])
        pooled = main_table(payload)["pooled"]
        assert pooled["k"] == 1


class TestSvg:
    def _payload(self):
        p, rids = three_study_project()
        p = triage.apply_action(p, cm.TriageAction(
            rids[0], "risk_of_bias", "flag", note="selection concern"))
        return analysis.build_analysis(p)

    def test_byte_identical_across_runs(self):
        a = svg_render.render_analysis_svgs(self._payload())
        b = svg_render.render_analysis_svgs(self._payload())
        assert a == b

    def test_twenty_circles_per_row(self):
        payload = self._payload()
        svg = svg_render.render_analysis_svgs(payload)["main analysis"]
        # 3 study rows + pooled row, 20 circles each
        assert svg.count("<circle") == 4 * 20

    def test_flag_glyph_carries_note(self):
        svg = svg_render.render_analysis_svgs(self._payload())["main analysis"]
        assert "<title>selection concern</title>" in svg

    def test_all_groups_rendered(self):
        svgs = svg_render.render_analysis_svgs(self._payload())
        assert set(svgs) == {"main analysis", "separate analysis",
                             "less applicable studies"}
        for doc in svgs.values():
            assert doc.startswith("<svg ") and doc.rstrip().endswith("</svg>")

    def test_escaping(self):
        p = cm.create_project(cm.ResearchQuestion("robots & <friends>", "mood"))
        payload = analysis.build_analysis(p)
        svg = svg_render.render_analysis_svgs(payload)["main analysis"]
        assert "&amp;" in svg and "<friends>" not in svg
