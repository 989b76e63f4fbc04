import json

import numpy as np
import pytest

from freedec import DensityModel, fit_glue
from freedec.cli import main
from freedec.io import (
    load_density_csv,
    load_model,
    model_from_dict,
    model_to_dict,
    save_density_csv,
    save_model,
)


def _read(path):
    with open(path, "rb") as handle:
        return handle.read()


def test_sample_determinism(tmp_path):
    out1, out2 = tmp_path / "a.txt", tmp_path / "b.txt"
    args = ["sample", "--ensemble", "wigner", "--n", "4", "--seed", "7"]
    assert main(args + ["-o", str(out1)]) == 0
    assert main(args + ["-o", str(out2)]) == 0
    assert _read(out1) == _read(out2)


def test_sample_mp_sorted(tmp_path):
    out = tmp_path / "eig.txt"
    code = main(
        ["sample", "--ensemble", "mp", "--n", "50", "--d", "500", "--seed", "1", "-o", str(out)]
    )
    assert code == 0
    vals = np.loadtxt(out)
    assert vals.size == 50
    assert np.all(np.diff(vals) >= 0)


def test_sample_kesten_mckay_odd_degree_fails(tmp_path, capsys):
    code = main(
        ["sample", "--ensemble", "kesten-mckay", "--n", "10", "--d", "3", "--seed", "1",
         "-o", str(tmp_path / "x.txt")]
    )
    assert code == 2
    assert "even" in capsys.readouterr().err


def test_sample_meixner_qmc(tmp_path):
    out = tmp_path / "m.txt"
    code = main(
        ["sample", "--ensemble", "meixner", "--n", "200", "--a", "0.1", "--b", "4",
         "--c", "0.6", "--seed", "3", "-o", str(out)]
    )
    assert code == 0
    vals = np.loadtxt(out)
    assert vals.size == 200
    assert vals.min() > 0.1 - 2 * np.sqrt(4.0) - 0.1


def test_fit_and_decompress_roundtrip(tmp_path, capsys):
    eigs = tmp_path / "eigs.txt"
    model_path = tmp_path / "model.json"
    dens_path = tmp_path / "dens.csv"
    assert main(
        ["sample", "--ensemble", "mp", "--n", "300", "--d", "3000", "--seed", "5",
         "-o", str(eigs)]
    ) == 0
    assert main(["fit", "--eigs", str(eigs), "-K", "30", "-o", str(model_path)]) == 0
    out = capsys.readouterr().out
    assert "mass=1.0000" in out
    model, glue = load_model(model_path)
    assert glue is None
    assert model.mass() == pytest.approx(1.0, abs=1e-6)

    # ratio 1 reproduces the model density on the output grid
    assert main(
        ["decompress", "--model", str(model_path), "--ratio", "1", "-o", str(dens_path)]
    ) == 0
    x, d = load_density_csv(dens_path)
    assert np.max(np.abs(d - np.maximum(model.density(x), 0.0))) <= 1e-12
    diag = json.loads((tmp_path / "dens.diag.json").read_text())
    assert diag["failed_points"] == 0
    assert diag["ratio"] == 1.0


def test_fit_k0_single_coefficient(tmp_path):
    eigs = tmp_path / "eigs.txt"
    model_path = tmp_path / "m.json"
    main(["sample", "--ensemble", "wigner", "--n", "64", "--seed", "2", "-o", str(eigs)])
    assert main(
        ["fit", "--eigs", str(eigs), "-K", "0", "--support", "minmax", "-o", str(model_path)]
    ) == 0
    model, _ = load_model(model_path)
    assert model.psi.size == 1


def test_model_roundtrip_exact():
    rng = np.random.default_rng(3)
    model = DensityModel(
        support=(-1.25, 2.75),
        basis="chebyshev-u",
        psi=rng.standard_normal(17) * np.pi,
        meta={"n_s": 12},
    )
    glue = fit_glue(model, q=1)
    doc = json.loads(json.dumps(model_to_dict(model, glue)))
    back, glue_back = model_from_dict(doc)
    assert np.array_equal(back.psi, model.psi)  # repr round-trip is exact
    assert back.support == model.support
    assert np.array_equal(glue_back.poles, glue.poles)
    assert np.array_equal(glue_back.residues, glue.residues)


def test_model_schema_validation(tmp_path):
    bad = {"schema_version": 2, "support": [0, 1], "basis": {"kind": "chebyshev-u"},
           "coefficients": [1.0]}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    with pytest.raises(Exception):
        load_model(path)


def test_decompress_fault_injection(tmp_path, capsys):
    # NaN coefficients give an unsolvable field: nonzero exit, diagnostics
    model = DensityModel(support=(0.0, 1.0), basis="chebyshev-u",
                         psi=np.array([4 / np.pi, np.nan]))
    path = tmp_path / "broken.json"
    save_model(path, model)
    code = main(
        ["decompress", "--model", str(path), "--ratio", "32",
         "--grid", "0:5:100", "-o", str(tmp_path / "d.csv")]
    )
    assert code == 3
    assert "failed" in capsys.readouterr().err


def test_metrics_command(tmp_path, capsys):
    x = np.linspace(0.0, 1.0, 257)
    save_density_csv(tmp_path / "a.csv", x, np.ones_like(x))
    save_density_csv(tmp_path / "b.csv", x, 2.0 * x)
    code = main(
        ["metrics", "--a", str(tmp_path / "a.csv"), "--b", str(tmp_path / "b.csv"),
         "-o", str(tmp_path / "report.json")]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "TV" in out and "JS" in out
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["tv"] == pytest.approx(0.25, abs=1e-3)


def test_density_csv_validation(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x,density\n1.0,0.5\n0.5,0.5\n")
    with pytest.raises(Exception):
        load_density_csv(path)


def test_law_descriptor_serializable():
    from freedec import marchenko_pastur_law
    from freedec.io import law_descriptor

    doc = json.loads(json.dumps(law_descriptor(marchenko_pastur_law(2.0))))
    assert doc["schema_version"] == 1
    assert doc["name"] == "mp"
    assert doc["support"][0] < doc["support"][1]
    assert doc["atoms"][0][1] == pytest.approx(0.5, abs=1e-6)


def test_thread_cap_env(tmp_path, monkeypatch):
    monkeypatch.setenv("FREEDEC_THREADS", "2")
    out = tmp_path / "w.txt"
    assert main(["sample", "--ensemble", "wigner", "--n", "8", "--seed", "1", "-o", str(out)]) == 0
    from freedec import decompress as dc

    assert dc._MAX_WORKERS == 2
    dc.set_max_workers(1)
