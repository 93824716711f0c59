"""Command-line surface: every verb, output formats, reproducibility."""

from __future__ import annotations

import json

import numpy as np
import pytest
from click.testing import CliRunner

from assqd.bench import CSV_COLUMNS, rows_from_csv
from assqd.cli import _build_spec, main
from assqd.models import ModelSpec, build_model
from assqd.oracle import exact_lowest, load_eigenpairs
from assqd.pauli import parse_hamiltonian
from assqd.sampling import CountsMultiset, counts_to_json, load_counts


@pytest.fixture()
def runner():
    return CliRunner()


def _invoke(runner, args):
    result = runner.invoke(main, args, catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return result


def _mask_wall(csv_text: str) -> str:
    """Replace the wall-clock column; timings vary between invocations."""
    wall_idx = CSV_COLUMNS.index("wall_ms")
    lines = csv_text.strip().split("\n")
    out = [lines[0]]
    for line in lines[1:]:
        cells = line.split(",")
        cells[wall_idx] = "_"
        out.append(",".join(cells))
    return "\n".join(out)


class TestModelVerb:
    def test_text_output_parses_to_the_same_hamiltonian(self, runner):
        result = _invoke(runner, ["--seed", "3", "model", "heisenberg", "4"])
        ham = parse_hamiltonian(result.output)
        expected, _ = build_model(ModelSpec(kind="heisenberg", n=4, seed=3))
        assert ham == expected

    def test_out_file_plus_metadata_sidecar(self, runner, tmp_path):
        out = tmp_path / "ham.txt"
        _invoke(runner, ["--seed", "1", "--out", str(out),
                         "model", "tfim", "3"])
        ham = parse_hamiltonian(out.read_text())
        assert ham.n == 3
        meta = json.loads((tmp_path / "ham.txt.meta.json").read_text())
        assert meta["kind"] == "tfim" and meta["seed"] == 1
        assert len(meta["fields"]) == 3

    def test_json_format_bundles_metadata(self, runner):
        result = _invoke(runner, ["--format", "json", "model", "heisenberg", "3"])
        doc = json.loads(result.output)
        assert parse_hamiltonian(doc["hamiltonian"]).n == 3
        assert doc["metadata"]["n"] == 3

    def test_unknown_kind_rejected(self, runner):
        result = runner.invoke(main, ["model", "xy", "4"])
        assert result.exit_code != 0


class TestOracleVerb:
    def test_energies_match_direct_solve(self, runner):
        result = _invoke(runner, ["--seed", "2", "oracle", "heisenberg", "4"])
        doc = json.loads(result.output)
        ham, _ = build_model(ModelSpec(kind="heisenberg", n=4, seed=2))
        eig = exact_lowest(ham)
        assert doc["e0"] == pytest.approx(eig.e0, abs=1e-12)
        assert doc["e1"] == pytest.approx(eig.e1, abs=1e-12)
        assert doc["degenerate_ground"] == eig.degenerate_ground

    def test_pairs_file_written(self, runner, tmp_path):
        pairs = tmp_path / "pairs.npz"
        _invoke(runner, ["oracle", "heisenberg", "4", "--pairs", str(pairs)])
        eig = load_eigenpairs(str(pairs))
        assert eig.vectors.shape == (16, 2)


class TestSampleVerb:
    def test_counts_parse_and_sum(self, runner):
        result = _invoke(
            runner, ["--seed", "5", "sample", "heisenberg", "4",
                     "--shots", "700"])
        counts = load_counts_from_text(result.output)
        assert counts.n == 4
        assert counts.total_shots == 700

    def test_deterministic_per_seed(self, runner):
        args = ["--seed", "5", "sample", "heisenberg", "4", "--shots", "300"]
        assert _invoke(runner, args).output == _invoke(runner, args).output

    def test_bit_order_flag_changes_keys_not_content(self, runner):
        base = ["--seed", "5", "sample", "heisenberg", "4", "--shots", "300"]
        first = json.loads(_invoke(runner, base + ["--bit-order", "qubit0_first"]).output)
        last = json.loads(_invoke(runner, base + ["--bit-order", "qubit0_last"]).output)
        assert first["bit_order"] == "qubit0_first"
        assert last["bit_order"] == "qubit0_last"
        flipped = {key[::-1]: v for key, v in last["counts"].items()}
        assert flipped == first["counts"]


def load_counts_from_text(text: str) -> CountsMultiset:
    import io

    return load_counts(io.StringIO(text))


@pytest.fixture()
def artifacts(runner, tmp_path):
    ham_path = tmp_path / "ham.txt"
    counts_path = tmp_path / "counts.json"
    _invoke(runner, ["--seed", "0", "--out", str(ham_path),
                     "model", "heisenberg", "4"])
    _invoke(runner, ["--seed", "0", "--out", str(counts_path),
                     "sample", "heisenberg", "4", "--shots", "500"])
    return ham_path, counts_path


class TestRunVerb:
    def test_expansion_trace_reaches_reference(self, runner, artifacts):
        ham_path, counts_path = artifacts
        result = _invoke(runner, ["--seed", "0", "run", str(ham_path),
                                  str(counts_path), "--method", "en"])
        doc = json.loads(result.output)
        assert doc["method"] == "as-en"
        assert doc["err"] <= 1e-9
        assert doc["reference"]["e0"] is not None
        assert [r["iteration"] for r in doc["records"]] == list(
            range(len(doc["records"]))
        )

    def test_no_exact_skips_reference(self, runner, artifacts):
        ham_path, counts_path = artifacts
        result = _invoke(runner, ["run", str(ham_path), str(counts_path),
                                  "--method", "standard", "--no-exact"])
        doc = json.loads(result.output)
        assert doc["err"] is None
        assert doc["reference"]["e0"] is None

    def test_mismatched_counts_rejected(self, runner, artifacts, tmp_path):
        ham_path, _ = artifacts
        wrong = tmp_path / "wrong.json"
        wrong.write_text(counts_to_json(
            CountsMultiset(counts={0: 5}, n=6, total_shots=5)))
        result = runner.invoke(main, ["run", str(ham_path), str(wrong)])
        assert result.exit_code != 0
        assert "n=6" in result.output

    def test_flags_reach_the_driver(self, runner, artifacts):
        ham_path, counts_path = artifacts
        result = _invoke(runner, ["run", str(ham_path), str(counts_path),
                                  "-K", "5", "-B", "2", "-T", "3",
                                  "--no-exact"])
        doc = json.loads(result.output)
        assert doc["config"]["K"] == 5
        assert doc["config"]["B"] == 2
        assert doc["records"][0]["subspace_size"] == 5


class TestIngestVerb:
    def test_noisy_counts_recover_reference(self, runner, tmp_path):
        ham, _ = build_model(ModelSpec(kind="heisenberg", n=6, seed=0))
        eig = exact_lowest(ham)
        rng = np.random.default_rng(11)
        half = 400
        good = rng.choice(64, size=half, p=np.abs(eig.psi0) ** 2)
        junk = rng.integers(0, 64, size=half)
        tally: dict[int, int] = {}
        for s in np.concatenate([good, junk]):
            tally[int(s)] = tally.get(int(s), 0) + 1
        path = tmp_path / "hw.json"
        path.write_text(counts_to_json(
            CountsMultiset(counts=tally, n=6, total_shots=2 * half)))

        result = _invoke(runner, ["--seed", "0", "ingest", str(path),
                                  "--kind", "heisenberg"])
        doc = json.loads(result.output)
        assert doc["model"]["kind"] == "heisenberg"
        assert doc["err"] <= 1e-8


class TestSweepVerbs:
    def test_bench_csv_with_medians_sidecar(self, runner, tmp_path):
        out = tmp_path / "table.csv"
        _invoke(runner, ["--out", str(out), "bench", "--sizes", "4",
                         "--seeds", "0,1", "--shots", "300"])
        rows = rows_from_csv(out.read_text())
        assert len(rows) == 2 * 3
        medians = json.loads((tmp_path / "table.csv.medians.json").read_text())
        assert {m["method"] for m in medians} == {"standard", "random", "as-en"}

    def test_bench_json_single_document(self, runner):
        result = _invoke(runner, ["--format", "json", "bench", "--sizes", "4",
                                  "--seeds", "0", "--shots", "300"])
        doc = json.loads(result.output)
        assert set(doc) == {"rows", "medians"}
        assert len(doc["rows"]) == 3

    def test_repeat_invocation_identical_modulo_timing(self, runner, tmp_path):
        args = ["bench", "--sizes", "4,6", "--seeds", "0,1", "--shots", "300"]
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        _invoke(runner, ["--out", str(a)] + args)
        _invoke(runner, ["--out", str(b)] + args)
        assert _mask_wall(a.read_text()) == _mask_wall(b.read_text())

    def test_ablate_defaults_to_variant_set(self, runner):
        result = _invoke(runner, ["--format", "json", "ablate", "--sizes", "4",
                                  "--seeds", "0", "--shots", "300"])
        doc = json.loads(result.output)
        assert {r["method"] for r in doc["rows"]} == {
            "as-en", "as-coupling_only", "as-denom_only", "as-diag_only"}

    def test_hops_emits_stats(self, runner):
        result = _invoke(runner, ["--format", "json", "hops", "--sizes", "4",
                                  "--seeds", "0", "--shots", "300"])
        doc = json.loads(result.output)
        assert set(doc) == {"rows", "stats"}
        assert {r["hops"] for r in doc["rows"]} == {1, 2}
        assert doc["stats"][0]["threshold"] == 1e-6

    def test_bad_sizes_list_rejected(self, runner):
        result = runner.invoke(main, ["bench", "--sizes", "4;6"])
        assert result.exit_code != 0

    def test_include_16_appends_size(self):
        spec = _build_spec(
            kind="heisenberg", sizes="8", seeds="0", include_16=True,
            shots=None, eta=0.2, K=50, B=20, T=10, tau=1e-4, eps=1e-8,
            workers=1,
        )
        assert spec.sizes == (8, 16)

    def test_help_lists_all_verbs(self, runner):
        result = _invoke(runner, ["--help"])
        for verb in ("model", "oracle", "sample", "run",
                     "bench", "ablate", "hops", "ingest"):
            assert verb in result.output
