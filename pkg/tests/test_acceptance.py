import math

import numpy as np
import pytest
from sklearn.datasets import make_moons
from sklearn.svm import SVC

import reference_tables as ref
from conftest import ACCEPTANCE_LINES
from oracles import dtw_brute, krdtw_brute
from spdtw.elastic_dense import band_cell_count, band_radius, dtw, dtw_sc, krdtw, krdtw_terms
from spdtw.elastic_sparse import pairwise_sp_krdtw, sp_dtw, sp_krdtw
from spdtw.evaluation import MeasureSpec, SvmConfig, evaluate, onenn, wilcoxon_signed_rank
from spdtw.evaluation.svm import svm_predict, svm_train
from spdtw.measures_basic import corr, euclidean
from spdtw.path_sparsifier import SparsePathMatrix, ensure_connectivity, learn_path_matrix
from spdtw.series import load_ucr, resolve_dataset, znormalize

AVAILABLE = {}
for _name in ("Gun-Point", "Trace", "ArrowHead", "FacesUCR", "OSULeaf", "Adiac", "CBF"):
    try:
        AVAILABLE[_name] = resolve_dataset(_name)
    except FileNotFoundError:
        pass

_cache = {}


def load(name):
    if name not in AVAILABLE:
        raise FileNotFoundError(f"{name} data not found; set ELASTIC_SPARSE_DATA")
    if name not in _cache:
        tr, te = AVAILABLE[name]
        _cache[name] = (load_ucr(tr, name=name), load_ucr(te, name=name))
    return _cache[name]


def sp_dtw_run(name):
    key = ("sp_dtw", name)
    if key not in _cache:
        train, test = load(name)
        _cache[key] = evaluate(train, test, MeasureSpec("sp_dtw", theta=0, gamma=0.0))
    return _cache[key]


def _missing(name):
    # runs and fails when the files are absent; reported as xfail, never skipped
    return pytest.mark.xfail(
        name not in AVAILABLE, reason=f"{name} data not present", raises=AssertionError, strict=True
    )


# 1. golden 1-NN errors


@pytest.mark.parametrize(
    "name, kind, expected",
    [
        pytest.param("Gun-Point", "ed", 0.087, marks=_missing("Gun-Point")),
        pytest.param("Adiac", "ed", 0.389, marks=_missing("Adiac")),
        pytest.param("Trace", "dtw", 0.000, marks=_missing("Trace")),
        pytest.param("CBF", "dtw", 0.003, marks=_missing("CBF")),
    ],
)
def test_c1_golden_errors(name, kind, expected, record):
    label = f"C1 1-NN {kind} {name} = {expected:.3f}"
    try:
        train, test = load(name)
    except FileNotFoundError as exc:
        record(label, False, f"data missing: {exc}")
    costs = ("sq", "abs") if kind == "dtw" else ("sq",)
    errs = {c: onenn(train, test, MeasureSpec(kind, cost=c)).error_rate for c in costs}
    ok = any(round(e, 3) == expected for e in errs.values())
    record(label, ok, ", ".join(f"{c}: {e:.3f}" for c, e in errs.items()))


# 2, 3. visited-cell counts


def test_c2_sakoe_chiba_cells(record):
    bad = []
    for name, row in ref.CELLS.items():
        T = math.isqrt(row[0])
        pct = ref.ONENN[name][5]
        got = band_cell_count(T, band_radius(pct, T))
        x = np.zeros(T)
        if got != row[1] or dtw_sc(x, x, band_pct=pct).visited != row[1]:
            bad.append(f"{name}: {got} vs {row[1]}")
    record("C2 DTW_sc visited cells, 30 rows", not bad, "; ".join(bad) or "30/30 exact")


def test_c3_dense_cells(record):
    bad = []
    for name, row in ref.CELLS.items():
        T = math.isqrt(row[0])
        if T * T != row[0] or dtw(np.zeros(T), np.zeros(T)).visited != row[0]:
            bad.append(name)
    record("C3 DTW visited = T^2, 30 rows", not bad, ", ".join(bad) or "30/30 exact")


# 4. triangle inequality fails


def test_c4_triangle_counterexample(record):
    v = (
        dtw([0.0], [1.0, 2.0], "abs").value,
        dtw([1.0, 2.0], [2.0, 3.0, 3.0], "abs").value,
        dtw([0.0], [2.0, 3.0, 3.0], "abs").value,
    )
    record("C4 triangle counterexample 3, 3, 8", v == (3, 3, 8), str(v))


# 5, 6. oracle equivalence


def test_c5_full_grid_equivalence(record):
    r = np.random.default_rng(5)
    n = 1000
    worst_d = worst_k = 0.0
    for k in range(n):
        T = int(r.integers(1, 33))
        x, y = r.normal(size=(2, T))
        cost = ("sq", "abs")[k % 2]
        nu = float(r.uniform(0.01, 5.0))
        full = SparsePathMatrix.full(T)
        worst_d = max(worst_d, abs(sp_dtw(x, y, full, cost).value - dtw(x, y, cost).value))
        k0 = krdtw(x, y, nu).value
        worst_k = max(worst_k, abs(sp_krdtw(x, y, full, nu).value - k0) / max(abs(k0), 1e-300))
    record(
        "C5 full-grid sp_dtw / sp_krdtw equivalence",
        worst_d <= 1e-12 and worst_k <= 1e-9,
        f"{n} instances, max dtw diff {worst_d:.1e}, max rel krdtw diff {worst_k:.1e}",
    )


def test_c6_enumeration(record):
    r = np.random.default_rng(6)
    n = 500
    bad = 0
    for k in range(n):
        T1, T2 = int(r.integers(1, 6)), int(r.integers(1, 6))
        x, y = list(r.integers(-4, 5, T1).astype(float)), list(r.integers(-4, 5, T2).astype(float))
        cost = ("sq", "abs")[k % 2]
        if dtw(x, y, cost).value != dtw_brute(x, y, cost):
            bad += 1
        T = int(r.integers(1, 6))
        a, b = r.normal(size=(2, T))
        nu = float(r.uniform(0.05, 5.0))
        k1, k2 = krdtw_brute(list(a), list(b), nu)
        l1, l2 = krdtw_terms(a, b, nu)
        if not (math.isclose(math.exp(l1), k1, rel_tol=1e-9) and math.isclose(math.exp(l2), k2, rel_tol=1e-9)):
            bad += 1
    record("C6 dtw and K1/K2 against path enumeration", bad == 0, f"{n} instances each, {bad} mismatches")


# 7. positive definiteness


def test_c7_positive_definite(record):
    r = np.random.default_rng(7)
    T = 24
    X = r.normal(size=(30, T))
    mats = []
    for density in (0.15, 0.3, 0.6):
        mask = r.random((T, T)) < density
        mats.append(("random", ensure_connectivity(SparsePathMatrix.from_mask(mask))))
        mats.append(("symmetric", ensure_connectivity(SparsePathMatrix.from_mask(mask | mask.T))))
    mats.append(("band", SparsePathMatrix.band(T, 2)))
    mats.append(("learned", learn_path_matrix(X[:10], theta=3, gamma=0.0)))
    worst = math.inf
    for _, m in mats:
        for nu in (0.1, 1.0):
            L, _ = pairwise_sp_krdtw(X, None, m, nu)
            L = 0.5 * (L + L.T)
            d = np.diag(L)
            K = np.exp(L - 0.5 * (d[:, None] + d[None, :]))
            eig = np.linalg.eigvalsh(K)
            worst = min(worst, eig[0] / eig[-1])
    record("C7 normalized SP-K_rdtw Gram p.d.", worst >= -1e-8, f"{len(mats)} SPMs x 2 nu, min eig/max eig {worst:.2e}")


# 8. correlation and Euclidean distance


def test_c8_corr_vs_euclidean(record):
    r = np.random.default_rng(8)
    worst = 0.0
    for _ in range(1000):
        T = int(r.integers(3, 300))
        x, y = znormalize(r.normal(size=T)), znormalize(r.normal(size=T))
        worst = max(worst, abs(corr(x, y) - (1 - euclidean(x, y) ** 2 / (2 * T))))
    same = []
    for name in AVAILABLE:
        train, test = load(name)
        a = onenn(train, test, MeasureSpec("ed")).predictions
        b = onenn(train, test, MeasureSpec("corr")).predictions
        same.append((name, bool(np.array_equal(a, b))))
    ok = worst <= 1e-9 and all(s for _, s in same)
    detail = f"identity max dev {worst:.1e}; predictions equal on " + ", ".join(
        f"{n}={'yes' if s else 'NO'}" for n, s in same
    )
    record("C8 corr vs Ed", ok, detail)


# 9. SP-DTW accuracy


@pytest.mark.parametrize(
    "name, bound",
    [pytest.param("Gun-Point", 0.060, marks=_missing("Gun-Point")), pytest.param("Trace", 0.020, marks=_missing("Trace"))],
)
def test_c9_sp_dtw_accuracy(name, bound, record):
    label = f"C9 SP-DTW {name} error <= {bound:.3f}"
    try:
        rep = sp_dtw_run(name)
    except FileNotFoundError as exc:
        record(label, False, f"data missing: {exc}")
    record(label, rep.error_rate <= bound, f"error {rep.error_rate:.3f}, {rep.chosen_params}")


def test_c9_scorecard():
    # informational: only five of thirty datasets are vendored
    rows, within = [], 0
    for name in ("Gun-Point", "Trace", "ArrowHead", "FacesUCR"):
        if name not in AVAILABLE:
            rows.append(f"{name}=missing")
            continue
        err = sp_dtw_run(name).error_rate
        target = ref.ONENN[name][7]
        hit = abs(err - target) <= 0.05
        within += hit
        rows.append(f"{name} {err:.3f} vs {target:.3f}{'' if hit else ' (off)'}")
    detail = f"{within} within 0.05 of {len(ref.ONENN)} listed (only {len(rows)} evaluated): " + "; ".join(rows)
    ACCEPTANCE_LINES.append(f"INFO  C9 scorecard, not a gate  {detail}")


# 10. Wilcoxon on table columns


def test_c10_wilcoxon(record):
    dtw_col = [v[3] for v in ref.ONENN.values()]
    sc_col = [v[4] for v in ref.ONENN.values()]
    p = wilcoxon_signed_rank(dtw_col, sc_col)
    record("C10 Wilcoxon DTW vs DTW_sc p in [0.0007, 0.0017]", 0.0007 <= p <= 0.0017, f"p = {p:.5f}")


# 11. speed-up


def test_c11_average_speedup(record):
    sp = np.mean([100 * (1 - v[3] / v[0]) for v in ref.CELLS.values()])
    kr = np.mean([100 * (1 - v[5] / v[0]) for v in ref.CELLS.values()])
    ok = round(sp, 1) == 82.6 and round(kr, 1) == 82.3
    record("C11 average speed-up 82.6 / 82.3", ok, f"SP-DTW {sp:.2f}, SP-K_rdtw {kr:.2f}")


@pytest.mark.parametrize("name", [pytest.param("Gun-Point", marks=_missing("Gun-Point")),
                                  pytest.param("Trace", marks=_missing("Trace"))])
def test_c11_learned_matrix_prunes(name, record):
    label = f"C11 {name} learned SPM visits fewer than T^2 cells"
    try:
        rep = sp_dtw_run(name)
        train, _ = load(name)
    except FileNotFoundError as exc:
        record(label, False, f"data missing: {exc}")
    theta = rep.chosen_params["theta"]
    T = train.length
    per_pair = rep.total_visited // (train.n * (rep.predictions.size))
    ok = theta == 0 or per_pair < T * T
    record(label, ok, f"theta={theta}, visited {per_pair} of {T * T} ({rep.speedup_pct:.1f}%)")


# SVM


def _rbf(A, B, g=1.0):
    return np.exp(-g * ((A[:, None, :] - B[None, :, :]) ** 2).sum(-1))


def test_svm_invariants(record):
    X, y = make_moons(150, noise=0.3, random_state=2)
    cfg = SvmConfig(c=10.0, tolerance=1e-4)
    (m,) = svm_train(_rbf(X, X), y, cfg).machines
    a = m.alpha
    ok = (
        np.all(a >= 0)
        and np.all(a <= cfg.c)
        and abs(np.dot(a, m.y)) <= 1e-9
        and m.kkt_gap < cfg.tolerance
        and np.all(np.diff(m.objective) >= -1e-12)
    )
    record("SVM SMO KKT / duality invariants", bool(ok), f"gap {m.kkt_gap:.1e}, sum(alpha y) {np.dot(a, m.y):.1e}")


def test_svm_two_moons_reference(record):
    X, y = make_moons(200, noise=0.25, random_state=3)
    Xt, yt = make_moons(300, noise=0.25, random_state=4)
    K, Kt = _rbf(X, X), _rbf(Xt, X)
    ours = np.mean(svm_predict(svm_train(K, y, SvmConfig(c=1.0)), Kt) != yt)
    theirs = np.mean(SVC(C=1.0, kernel="precomputed").fit(K, y).predict(Kt) != yt)
    record("SVM two-moons within 2% of reference", abs(ours - theirs) <= 0.02, f"{ours:.3f} vs {theirs:.3f}")


@pytest.mark.parametrize("name", [pytest.param("Gun-Point", marks=_missing("Gun-Point"))])
def test_svm_gunpoint_sp_krdtw(name, record):
    label = "SVM SP-K_rdtw Gun-Point error <= 0.050"
    try:
        train, test = load(name)
    except FileNotFoundError as exc:
        record(label, False, f"data missing: {exc}")
    rep = evaluate(train, test, MeasureSpec("sp_krdtw", theta=0, nu=1.0), "svm", None, seed=0)
    record(label, rep.error_rate <= 0.05, f"error {rep.error_rate:.3f}, {rep.chosen_params}")
