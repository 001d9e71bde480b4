import numpy as np
import pytest

from provkit.svm import BinarySvm, OvrSvm, smo_solve, svm_predict, svm_train


def linear_gram(points):
    x = np.asarray(points, dtype=np.float64)
    return x @ x.T


def test_separable_line_is_learned_exactly():
    pts = [[-2.0, 1.0], [-1.0, 1.0], [1.0, 1.0], [2.0, 1.0]]
    k = linear_gram(pts)
    labels = ["neg", "neg", "pos", "pos"]
    model = svm_train(k, labels, C=10.0, tol=1e-6)
    assert svm_predict(model, k) == labels


def test_three_clusters_ovr():
    rng = np.random.default_rng(7)
    centers = {"a": (0.0, 0.0), "b": (10.0, 0.0), "c": (0.0, 10.0)}
    pts, labels = [], []
    for cls, (cx, cy) in centers.items():
        for _ in range(8):
            pts.append([cx + rng.normal(0, 0.3), cy + rng.normal(0, 0.3), 1.0])
            labels.append(cls)
    k = linear_gram(pts)
    model = svm_train(k, labels, C=5.0, tol=1e-6)
    assert model.classes == ("a", "b", "c")
    assert svm_predict(model, k) == labels


def test_tie_goes_to_lowest_class():
    # Perfectly symmetric two-point problem: the midpoint scores zero for
    # both one-vs-rest models, so argmax must fall back to sorted order.
    k = np.array([[1.0, -1.0], [-1.0, 1.0]])
    model = svm_train(k, ["b", "a"], C=1.0, tol=1e-8)
    mid = np.array([[0.0, 0.0]])
    scores = model.decision_matrix(mid)
    assert scores[0, 0] == pytest.approx(scores[0, 1], abs=1e-9)
    assert svm_predict(model, mid) == ["a"]


def test_c_zero_degenerates_to_constant_class():
    k = linear_gram([[1.0], [2.0], [3.0], [4.0]])
    model = svm_train(k, ["x", "y", "x", "y"], C=0.0)
    for sub in model.models:
        assert np.all(sub.alpha == 0.0)
        assert sub.b == 0.0
        assert sub.n_iter == 0
    assert svm_predict(model, k) == ["x"] * 4


def test_single_class_rejected():
    with pytest.raises(ValueError):
        svm_train(np.eye(3), ["same", "same", "same"], C=1.0)


def test_alpha_stays_in_box_and_kkt_holds():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(30, 4))
    k = x @ x.T
    y = np.where(rng.random(30) < 0.5, 1.0, -1.0)
    if abs(y.sum()) == 30:  # pragma: no cover - astronomically unlikely
        y[0] = -y[0]
    for c in (0.5, 2.0):
        alpha, b, n_iter, converged, _ = smo_solve(k, y, C=c, tol=1e-4)
        assert converged
        assert np.all(alpha >= -1e-12) and np.all(alpha <= c + 1e-12)
        grad = (y[:, None] * y[None, :] * k) @ alpha - 1.0
        neg_yg = -y * grad
        up = ((y > 0) & (alpha < c - 1e-9)) | ((y < 0) & (alpha > 1e-9))
        low = ((y > 0) & (alpha > 1e-9)) | ((y < 0) & (alpha < c - 1e-9))
        assert neg_yg[up].max() - neg_yg[low].min() <= 1e-4 + 1e-9
        assert abs(float(y @ alpha)) < 1e-9


def test_objective_trace_never_increases():
    rng = np.random.default_rng(11)
    x = rng.normal(size=(25, 3))
    k = x @ x.T
    y = np.where(np.arange(25) % 2 == 0, 1.0, -1.0)
    _, _, _, _, history = smo_solve(k, y, C=1.0, tol=1e-6)
    hist = np.array(history)
    assert np.all(np.diff(hist) <= 1e-9 * (1.0 + np.abs(hist[:-1])))


def test_duplicated_point_leaves_decision_function_alone():
    pts = [[-3.0, 1.0], [-1.5, 1.0], [-1.0, 1.0], [1.0, 1.0], [1.5, 1.0], [3.0, 1.0]]
    labels = ["n", "n", "n", "p", "p", "p"]
    k = linear_gram(pts)
    base = svm_train(k, labels, C=1.0, tol=1e-9)
    dup_pts = pts + [pts[2]]
    dup = svm_train(linear_gram(dup_pts), labels + ["n"], C=1.0, tol=1e-9)
    probe = linear_gram(pts)  # decision values at the original points
    probe_dup = np.asarray(pts, dtype=np.float64) @ np.asarray(dup_pts).T
    np.testing.assert_allclose(
        base.decision_matrix(probe), dup.decision_matrix(probe_dup), atol=1e-6
    )


def test_all_zero_kernel_trains_and_predicts_constant():
    k = np.zeros((6, 6))
    model = svm_train(k, ["a", "b", "a", "b", "a", "b"], C=1.0)
    preds = svm_predict(model, np.zeros((4, 6)))
    assert len(set(preds)) == 1


def test_support_and_dual_coef_shapes():
    pts = [[-2.0, 1.0], [-1.0, 1.0], [1.0, 1.0], [2.0, 1.0]]
    model = svm_train(linear_gram(pts), ["n", "n", "p", "p"], C=1.0, tol=1e-8)
    sub = model.models[0]
    assert isinstance(sub, BinarySvm)
    assert sub.dual_coef.shape == (4,)
    assert set(sub.support).issubset(range(4))
    assert isinstance(model, OvrSvm)


def test_kernel_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        smo_solve(np.eye(3), np.array([1.0, -1.0]), C=1.0)
    with pytest.raises(ValueError):
        svm_train(np.eye(3), ["a", "b"], C=1.0)
