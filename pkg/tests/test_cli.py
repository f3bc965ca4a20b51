import json
import shutil

import pytest

from dibrm.cli import LOCK_NAME, main
from dibrm.series import read_snapshot_csv

from conftest import FIXTURES

GOLDEN = FIXTURES / "golden"
POST_HEADER = "PostId,UserId,CreationDate,Vote\n"
COMMENT_HEADER = "CommentId,UserId,CreationDate,PostId,Vote,ParentId\n"


def golden_args(*extra):
    return ["--config", str(GOLDEN / "config.json"), "--posts", str(GOLDEN / "posts.csv"),
            "--comments", str(GOLDEN / "comments.csv"), "--no-figures", *extra]


def test_compute_matches_golden_bytes(tmp_path):
    assert main(["compute", *golden_args("--out", str(tmp_path))]) == 0
    for name in ("dibrm_reputation.csv", "dibrm_historical.csv", "reference.csv"):
        assert (tmp_path / name).read_bytes() == (GOLDEN / "expected" / name).read_bytes()
    assert not (tmp_path / LOCK_NAME).exists()


def test_compare_matches_golden_bytes(tmp_path, capsys):
    assert main(["compare", *golden_args("--out", str(tmp_path))]) == 0
    for name in ("agreement_reputation.json", "agreement_historical.json"):
        assert (tmp_path / name).read_bytes() == (GOLDEN / "expected" / name).read_bytes()
    assert "historical: mu=0.8 sigma=0.0" in capsys.readouterr().out


def test_empty_stream_exits_zero(tmp_path):
    (tmp_path / "p.csv").write_text(POST_HEADER)
    (tmp_path / "c.csv").write_text(COMMENT_HEADER)
    out = tmp_path / "out"
    code = main(["compute", "--posts", str(tmp_path / "p.csv"), "--comments", str(tmp_path / "c.csv"),
                 "--out", str(out)])
    assert code == 0
    assert (out / "dibrm_reputation.csv").read_text() == "UserId,Day,Value,Rank\n"


def test_missing_file_exit_code(tmp_path):
    assert main(["compute", "--posts", str(tmp_path / "nope.csv"), "--out", str(tmp_path)]) == 2


def test_no_inputs_is_validation_error(tmp_path):
    assert main(["compute", "--out", str(tmp_path)]) == 1


def test_bad_param_is_validation_error(tmp_path):
    assert main(["compute", *golden_args("--beta", "1.5", "--out", str(tmp_path))]) == 1


def test_malformed_row_exit_and_skip(tmp_path, capsys):
    posts = tmp_path / "p.csv"
    posts.write_text(POST_HEADER + "1,1,2018-06-01T00:00:00Z,1\n2,1,yesterday,1\n")
    assert main(["compute", "--posts", str(posts), "--out", str(tmp_path / "a")]) == 1
    assert "line 3" in capsys.readouterr().err
    assert main(["compute", "--posts", str(posts), "--skip-bad-rows", "--out", str(tmp_path / "b")]) == 0


def test_self_compare_from_snapshot(tmp_path, capsys):
    ref = GOLDEN / "expected" / "reference.csv"
    assert main(["compare", "--reference-snapshot", str(ref), "--self-compare",
                 "--which", "reputation", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "agreement_reputation.json").read_text())
    assert report["mu"] == 1.0 and report["sigma"] == 0.0


def test_swapped_two_user_snapshot(tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    a.write_text("UserId,Day,Value,Rank\n1,2018-06-01,2.0,1\n2,2018-06-01,1.0,2\n")
    b.write_text("UserId,Day,Value,Rank\n1,2018-06-01,1.0,2\n2,2018-06-01,2.0,1\n")
    assert main(["compare", "--reference-snapshot", str(a), "--candidate-snapshot", str(b),
                 "--which", "reputation", "--out", str(tmp_path / "o")]) == 0
    assert json.loads((tmp_path / "o" / "agreement_reputation.json").read_text())["mu"] == 0.5


def test_mismatched_universes(tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    a.write_text("UserId,Day,Value,Rank\n1,2018-06-01,2.0,1\n2,2018-06-01,1.0,2\n")
    b.write_text("UserId,Day,Value,Rank\n1,2018-06-01,1.0,1\n")
    assert main(["compare", "--reference-snapshot", str(a), "--candidate-snapshot", str(b),
                 "--which", "historical", "--out", str(tmp_path / "o")]) == 1


def test_sigma_axis_day(tmp_path):
    assert main(["compare", *golden_args("--sigma-axis", "day", "--which", "historical",
                                         "--out", str(tmp_path))]) == 0
    report = json.loads((tmp_path / "agreement_historical.json").read_text())
    assert report["sigma_axis"] == "day" and len(report["per_day_mu"]) == 5


def test_sweep_row_counts(tmp_path):
    assert main(["sweep", *golden_args("--axis", "alpha=1,2", "--axis", "beta=0.5,0.9,0.99",
                                       "--out", str(tmp_path))]) == 0
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert len(lines) == 1 + 2 * 3 * 2


def test_sweep_base_values_axis(tmp_path):
    assert main(["sweep", *golden_args("--axis", "base_values=post=4;comment=2|post=8;comment=1",
                                       "--which", "reputation", "--out", str(tmp_path))]) == 0
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert [line.split(",")[3] for line in lines[1:]] == ["comment=2.0;post=4.0", "comment=1.0;post=8.0"]


def test_sweep_invalid_axis_value(tmp_path, capsys):
    assert main(["sweep", *golden_args("--axis", "beta=0.5,2", "--out", str(tmp_path))]) == 1
    assert "beta" in capsys.readouterr().err


def test_standard_grids_with_figures(tmp_path):
    args = [a for a in golden_args("--standard-grids", "--out", str(tmp_path)) if a != "--no-figures"]
    assert main(["sweep", *args]) == 0
    for name, rows in [("historical_by_ta_beta", 4), ("reputation_by_alpha", 4),
                       ("reputation_by_ta", 4), ("historical_by_ta", 4)]:
        assert len((tmp_path / f"{name}.csv").read_text().splitlines()) == 1 + rows
        assert (tmp_path / f"{name}.png").stat().st_size > 0


def test_plotdata_filter_and_figures(tmp_path):
    args = [a for a in golden_args("--user", "2", "--out", str(tmp_path)) if a != "--no-figures"]
    assert main(["plotdata", *args]) == 0
    lines = (tmp_path / "plotdata.csv").read_text().splitlines()
    assert lines[0] == "UserId,Day,Series,Value"
    assert len(lines) == 1 + 5 * 3
    assert {line.split(",")[0] for line in lines[1:]} == {"2"}
    [last] = [line for line in lines if line.startswith("2,2018-06-05,dibrm,")]
    assert float(last.split(",")[3]) == pytest.approx(181 / 12, rel=1e-12)
    assert (tmp_path / "figures" / "user_2.png").read_bytes()[:4] == b"\x89PNG"


def test_plotdata_unknown_user(tmp_path):
    assert main(["plotdata", *golden_args("--user", "99", "--out", str(tmp_path))]) == 1


def test_lockfile_blocks_second_run(tmp_path):
    (tmp_path / LOCK_NAME).write_text("123")
    assert main(["compute", *golden_args("--out", str(tmp_path))]) == 2


def test_flags_override_config(tmp_path):
    assert main(["compute", *golden_args("--beta", "1.0", "--out", str(tmp_path))]) == 0
    series = read_snapshot_csv(tmp_path / "dibrm_reputation.csv")
    # no decay: user 1 keeps 28/3 on the second day plus the 06-02 post
    assert series.row(1)[1] == pytest.approx(28 / 3 + 7)


def test_users_and_days_flags(tmp_path):
    assert main(["compute", *golden_args("--users", "1,2,3", "--to", "2018-06-03",
                                         "--out", str(tmp_path))]) == 0
    series = read_snapshot_csv(tmp_path / "reference.csv")
    assert series.users == (1, 2, 3) and len(series.days) == 3
    assert series.row(3).tolist() == [0, 0, 0]


def test_synth_is_deterministic_and_loadable(tmp_path, capsys):
    for name in ("a", "b"):
        assert main(["synth", "--n-users", "6", "--seed", "5", "--duration", "10",
                     "--out", str(tmp_path / name)]) == 0
    for f in ("posts.csv", "comments.csv", "synth_meta.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    out = tmp_path / "scores"
    assert main(["compute", "--posts", str(tmp_path / "a" / "posts.csv"),
                 "--comments", str(tmp_path / "a" / "comments.csv"), "--out", str(out)]) == 0
    assert read_snapshot_csv(out / "dibrm_reputation.csv").n_users == 6


def test_module_entry_point(tmp_path):
    import subprocess
    import sys

    shutil.copy(GOLDEN / "posts.csv", tmp_path / "posts.csv")
    proc = subprocess.run([sys.executable, "-m", "dibrm", "compute", "--posts", str(tmp_path / "posts.csv"),
                           "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr


def test_size_one_sweep_equals_compare(tmp_path):
    assert main(["compare", *golden_args("--alpha", "2", "--out", str(tmp_path / "c"))]) == 0
    assert main(["sweep", *golden_args("--axis", "alpha=2", "--out", str(tmp_path / "s"))]) == 0
    rows = [line.split(",") for line in (tmp_path / "s" / "sweep.csv").read_text().splitlines()[1:]]
    for row in rows:
        report = json.loads((tmp_path / "c" / f"agreement_{row[5]}.json").read_text())
        assert (float(row[6]), float(row[7])) == (report["mu"], report["sigma"])
