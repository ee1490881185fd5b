"""Report rendering: tables, CSVs, and figure files."""

import json

from cloneaug.rating import CombinationScore
from cloneaug.reporting import (
    render_run_report,
    render_session_report,
    render_wer_table,
    write_wer_csv,
)

ROWS = [
    {"scenario": "pretrained", "dropout": "-", "scorer": "-", "wer": 0.636},
    {"scenario": "ft_standard", "dropout": "standard", "scorer": "no", "wer": 0.657},
]


def test_render_wer_table_formats_three_decimals():
    table = render_wer_table(ROWS)
    lines = table.splitlines()
    assert lines[0].split() == ["Scenario", "Dropout", "Scorer", "WER"]
    assert "0.636" in lines[2]
    assert "0.657" in lines[3]


def test_write_wer_csv(tmp_path):
    write_wer_csv(ROWS, tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "scenario,dropout,scorer,wer"
    assert lines[1] == "pretrained,-,-,0.636"


def _score(name, standard_counts, long_counts):
    return CombinationScore(
        combination_name=name,
        num_rated=sum(standard_counts.values()) + sum(long_counts.values()),
        score=sum(
            {"poor": 1, "reasonable": 2, "good": 3}[c] * n
            for counts in (standard_counts, long_counts)
            for c, n in counts.items()
        ),
        by_duration_class={"standard": standard_counts, "long": long_counts},
    )


def test_render_session_report_writes_csv_and_figure(tmp_path):
    scores = [
        _score(
            "standard",
            {"poor": 2, "reasonable": 20, "good": 40},
            {"poor": 8, "reasonable": 4, "good": 2},
        ),
        _score(
            "sys_zero_voc",
            {"poor": 5, "reasonable": 25, "good": 30},
            {"poor": 15, "reasonable": 3, "good": 1},
        ),
    ]
    written = render_session_report(scores, tmp_path / "report")
    assert [p.name for p in written] == ["scores.csv", "scores.png"]
    for path in written:
        assert path.is_file() and path.stat().st_size > 0
    header, first, _ = (tmp_path / "report" / "scores.csv").read_text().splitlines()
    assert header.startswith("combination,num_rated,score,")
    assert first.startswith("standard,76,")


def test_render_run_report_from_run_dir(tmp_path):
    run = tmp_path / "run"
    (run / "report").mkdir(parents=True)
    (run / "report" / "report.json").write_text(json.dumps({"rows": ROWS}))
    (run / "filter").mkdir()
    (run / "filter" / "decisions.json").write_text(
        json.dumps(
            [
                {
                    "output_id": "a__from__b",
                    "generated_duration": 9.0,
                    "original_duration": 2.0,
                    "verdict": "discard",
                },
                {
                    "output_id": "c__from__d",
                    "generated_duration": 1.0,
                    "original_duration": 2.0,
                    "verdict": "keep",
                },
            ]
        )
    )
    written = render_run_report(run, tmp_path / "out")
    names = {p.name for p in written}
    assert names == {
        "report.txt",
        "report.csv",
        "wer_by_scenario.png",
        "filter_decisions.png",
    }
    for path in written:
        assert path.is_file() and path.stat().st_size > 0
