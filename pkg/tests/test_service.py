import pytest
from fastapi.testclient import TestClient

from spectrafit import __version__
from spectrafit.service import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


@pytest.fixture(scope="module")
def er_edge_list(client):
    resp = client.post("/generate", json={
        "family": "er", "n": 60, "seed": 3, "options": {"p": "0.2"}})
    assert resp.status_code == 200
    return resp.json()["edge_list"]


class TestHealth:
    def test_health(self, client):
        body = client.get("/health").json()
        assert body == {"status": "ok", "version": __version__}


class TestGenerate:
    def test_deterministic(self, client):
        payload = {"family": "ws", "n": 30, "seed": 9,
                   "options": {"p_r": "0.2"}}
        a = client.post("/generate", json=payload).json()
        b = client.post("/generate", json=payload).json()
        assert a["edge_hash"] == b["edge_hash"]
        assert a["edge_count"] == 30 * 4 // 2

    def test_bad_family(self, client):
        resp = client.post("/generate", json={
            "family": "nope", "n": 10, "options": {}})
        assert resp.status_code == 400
        assert "error" in resp.json()

    def test_infeasible_degree(self, client):
        resp = client.post("/generate", json={
            "family": "dr", "n": 5, "options": {"d": "3"}})
        assert resp.status_code == 400
        assert resp.json()["error"] == "InfeasibleDegreeError"

    def test_missing_field_is_422(self, client):
        assert client.post("/generate", json={"n": 10}).status_code == 422


class TestSpectrum:
    def test_eigenvalue_count(self, client, er_edge_list):
        body = client.post("/spectrum", json={
            "edge_list": er_edge_list, "output": "eigenvalues"}).json()
        assert len(body["eigenvalues"]) == 60
        assert body["scaling"] == "sqrt-n"

    def test_density_csv(self, client, er_edge_list):
        body = client.post("/spectrum", json={
            "edge_list": er_edge_list, "output": "density"}).json()
        assert body["csv"].splitlines()[0] == "x,value"
        assert body["sigma"] > 0

    def test_ecdf_csv(self, client, er_edge_list):
        body = client.post("/spectrum", json={
            "edge_list": er_edge_list, "output": "ecdf"}).json()
        assert body["csv"].splitlines()[0] == "x,value"

    def test_scaling_warning_surfaced(self, client, er_edge_list):
        body = client.post("/spectrum", json={
            "edge_list": er_edge_list, "output": "eigenvalues",
            "scaling": {"mode": "dr-scaled", "d": 3}}).json()
        assert any("regular" in w for w in body["warnings"])

    def test_malformed_edge_list(self, client):
        resp = client.post("/spectrum", json={
            "edge_list": "zero one\n", "output": "eigenvalues"})
        assert resp.status_code == 400
        assert resp.json()["error"] == "MalformedLineError"

    def test_missing_scaling_parameter(self, client, er_edge_list):
        resp = client.post("/spectrum", json={
            "edge_list": er_edge_list, "output": "eigenvalues",
            "scaling": {"mode": "er-variance"}})
        assert resp.status_code == 400


class TestLaw:
    def test_semicircle_density_at_zero(self, client):
        body = client.post("/law", json={
            "law": "semicircle", "output": "density", "x": [0.0]}).json()
        assert body["values"][0] == pytest.approx(0.3183098861)

    def test_kesten_mckay_needs_d(self, client):
        resp = client.post("/law", json={"law": "kesten-mckay"})
        assert resp.status_code == 400

    def test_default_grid(self, client):
        body = client.post("/law", json={"law": "semicircle-p",
                                         "p": 0.5}).json()
        assert len(body["x"]) == 2048
        assert body["support"] == [-1.0, 1.0]


class TestBmDensity:
    def test_unit_mass_curve(self, client):
        body = client.post("/bm-density", json={
            "block_sizes": [40, 40], "p0": 0.1, "p_within": [0.5, 0.5],
            "grid": {"x_min": -2.5, "x_max": 2.5, "points": 128}}).json()
        assert body["raw_mass"] == pytest.approx(1.0, abs=0.01)
        assert body["p_star"] == 0.5
        assert len(body["variance_ratios"]) == 3

    def test_bad_probability(self, client):
        resp = client.post("/bm-density", json={
            "block_sizes": [10], "p0": 0.1, "p_within": [1.5]})
        assert resp.status_code == 400


class TestFitAndSelect:
    def test_fit_report_fields(self, client, er_edge_list):
        body = client.post("/fit", json={
            "edge_list": er_edge_list, "family": "er"}).json()
        report = body["report"]
        assert report["provenance"] == "analytic"
        assert 0.0 < report["theta"][0] < 1.0
        assert body["version"] == __version__

    def test_fit_with_custom_space(self, client, er_edge_list):
        body = client.post("/fit", json={
            "edge_list": er_edge_list, "family": "er",
            "space": {"bounds": [[0.1, 0.4]], "steps": [0.1],
                      "mode": "grid"}}).json()
        assert body["report"]["theta"][0] in [0.1, 0.2, 0.3, 0.4]

    def test_select_ranks_candidates(self, client, er_edge_list):
        body = client.post("/select", json={
            "edge_list": er_edge_list, "candidates": ["er", "grg"],
            "options": {"divergence": "l1-cdf", "mc_samples": 4,
                        "grid_points": 256, "seed": 2}}).json()
        assert body["winner"] in ("er", "grg")
        values = [f["value"] for f in body["fits"]]
        assert values == sorted(values)

    def test_select_needs_two(self, client, er_edge_list):
        resp = client.post("/select", json={
            "edge_list": er_edge_list, "candidates": ["er"]})
        assert resp.status_code == 400


class TestExperiment:
    def test_confusion_roundtrip(self, client):
        config = ("[experiment]\nkind = confusion\nn = 30\nreps = 1\n"
                  "seed = 2\ndivergences = l1-cdf\nmc_samples = 2\n"
                  "grid_points = 128\n"
                  "[model]\nfamily = er\np = 0.3\n"
                  "[model]\nfamily = ba\np_s = 1.0\n")
        body = client.post("/experiment", json={"config": config}).json()
        assert body["kind"] == "confusion"
        assert body["csv"].startswith("divergence,n,truth,winner,count")

    def test_bad_config(self, client):
        resp = client.post("/experiment", json={"config": "garbage"})
        assert resp.status_code == 400
