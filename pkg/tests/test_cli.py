import filecmp
import json
import os

import numpy as np
import pytest

from mzip import cli
from mzip.errors import InvalidArgument
from mzip.io import format_table, ingest_dataset, read_numeric_column


def _write(path, text):
    path.write_text(text)
    return path


@pytest.fixture
def tiny_files(tmp_path):
    c = _write(tmp_path / "counts.tsv", "id\ttaxonA\ttaxonB\ns1\t3\t0\ns2\t1\t4\ns3\t0\t2\n")
    x = _write(tmp_path / "cov.csv", "id,age\ns2,1.5\ns1,-0.5\ns3,0.0\n")  # different order and delimiter
    return c, x


def test_ingest_well_formed(tiny_files):
    d = ingest_dataset(*tiny_files)
    assert (d.n, d.q, d.p_x, d.p_z) == (3, 2, 1, 1)
    assert d.outcome_names == ("taxonA", "taxonB")
    assert np.array_equal(d.x[:, 0], [-0.5, 1.5, 0.0])  # aligned to the count-file order
    assert np.array_equal(d.offset, [3.0, 5.0, 2.0])  # row sums


def test_rowsum_offset_by_hand(tmp_path):
    c = _write(tmp_path / "c.tsv", "id\ta\tb\nu\t2\t5\nv\t1\t0\n")
    x = _write(tmp_path / "x.tsv", "id\tk\nu\t1\nv\t2\n")
    assert list(ingest_dataset(c, x).offset) == [7.0, 1.0]
    assert list(ingest_dataset(c, x, offset="one").offset) == [1.0, 1.0]
    o = _write(tmp_path / "o.tsv", "id\toff\nv\t2.5\nu\t4\n")
    assert list(ingest_dataset(c, x, offset="file", offset_path=o).offset) == [4.0, 2.5]


def test_fractional_count_names_cell(tmp_path, tiny_files):
    c = _write(tmp_path / "bad.tsv", "id\ttaxonA\ttaxonB\ns1\t2.5\t0\ns2\t1\t4\ns3\t0\t2\n")
    with pytest.raises(InvalidArgument, match=r"taxonA.*2\.5|2\.5.*taxonA"):
        ingest_dataset(c, tiny_files[1])


@pytest.mark.parametrize("text,msg", [
    ("id\ta\ts1\t1\n", None),
    ("id\ta\ns1\t1\ns1\t2\n", "duplicate"),
    ("id\ta\ns1\t-1\n", None),
])
def test_ingest_rejects_malformed_counts(tmp_path, text, msg):
    c = _write(tmp_path / "c.tsv", text)
    x = _write(tmp_path / "x.tsv", "id\tk\ns1\t1\n")
    with pytest.raises(InvalidArgument, match=msg):
        ingest_dataset(c, x)


def test_missing_subject_in_covariates(tmp_path, tiny_files):
    x = _write(tmp_path / "x.tsv", "id\tage\ns1\t1\ns2\t2\n")
    with pytest.raises(InvalidArgument, match="s3"):
        ingest_dataset(tiny_files[0], x)


def test_format_table_na_and_repr():
    txt = format_table(["a", "b"], [[0.1, None], [float("nan"), 2]])
    assert txt == "a\tb\n0.1\tNA\nNA\t2\n"


def test_config_file_and_override(tmp_path):
    cfg = _write(tmp_path / "run.cfg", "# study settings\nscenario = VI\nscans = 500\nseed = 7\nno_uzip = true\n")
    a = cli.parse_args(["study", "--config", str(cfg)])
    assert (a.scenario, a.scans, a.seed, a.no_uzip) == ("VI", 500, 7, True)
    b = cli.parse_args(["study", "--config", str(cfg), "--scans", "900"])
    assert b.scans == 900 and b.seed == 7
    bad = _write(tmp_path / "bad.cfg", "bogus = 1\n")
    with pytest.raises(InvalidArgument, match="bogus"):
        cli.parse_args(["study", "--config", str(bad)])


def test_exit_codes(tmp_path, capsys):
    assert cli.main(["fit", "--counts", str(tmp_path / "none.tsv")]) in (1, 2)
    with pytest.raises(SystemExit) as e:
        cli.main(["nonsense"])
    assert e.value.code == 2


def _same_tree(a, b):
    cmp = filecmp.dircmp(a, b)
    assert not cmp.left_only and not cmp.right_only, (cmp.left_only, cmp.right_only)
    _, mism, err = filecmp.cmpfiles(a, b, cmp.common_files, shallow=False)
    assert not mism and not err, mism
    for d in cmp.common_dirs:
        _same_tree(a / d, b / d)


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """simulate -> fit -> summarize / diagnose / idr, twice with the same seeds and relative paths."""
    outs = []
    cwd = os.getcwd()
    rep = "sim/replicate001"
    data = ["--counts", f"{rep}/counts.tsv", "--covariates-x", f"{rep}/covariates_x.tsv"]
    for tag in ("a", "b"):
        root = tmp_path_factory.mktemp(tag)
        os.chdir(root)
        try:
            assert cli.main(["simulate", "--scenario", "I", "--n", "40", "--q", "4", "--seed", "3",
                             "--out", "sim"]) == 0
            assert cli.main(["fit", *data, "--scans", "300", "--seed", "5", "--chains", "2", "--out", "fit"]) == 0
            assert cli.main(["summarize", "--chain", "fit/chain1", "fit/chain2", "--out", "summary"]) == 0
            assert cli.main(["diagnose", "--chain", "fit/chain1", "--out", "diag"]) == 0
            assert cli.main(["idr", "--chain", "fit/chain1", *data, "--outcome", "y2", "--covariate", "x1",
                             "--out", "idr"]) == 0
        finally:
            os.chdir(cwd)
        outs.append(root)
    return outs


def test_pipeline_outputs_exist(pipeline):
    root = pipeline[0]
    assert (root / "fit" / "chain1" / "metadata.json").exists()
    assert (root / "fit" / "selection.tsv").exists()
    cfg = json.loads((root / "fit" / "resolved_config.json").read_text())
    assert cfg["scans"] == 300


def test_pipeline_is_byte_identical(pipeline):
    a, b = pipeline
    _same_tree(a, b)


def test_idr_unknown_covariate_fails(pipeline, tmp_path):
    root = pipeline[0]
    rep = root / "sim" / "replicate001"
    code = cli.main(["idr", "--chain", str(root / "fit" / "chain1"), "--counts", str(rep / "counts.tsv"),
                     "--covariates-x", str(rep / "covariates_x.tsv"), "--outcome", "y2", "--covariate", "nope",
                     "--out", str(tmp_path / "i")])
    assert code == 1


def test_read_numeric_column(tmp_path):
    p = _write(tmp_path / "v.tsv", "id\tv\na\t1.5\nb\t2\n")
    ids, vals = read_numeric_column(p)
    assert list(vals) == [1.5, 2.0]
