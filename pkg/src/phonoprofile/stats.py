"""Statistical estimators backing the corpus analyses.

Everything is implemented directly on numpy so each estimator can be
checked against brute-force oracles in the tests: rank correlations with
average-rank ties, bootstrap percentile intervals, Benjamini-Hochberg
step-up adjustment, Mann-Whitney U with exact small-sample enumeration,
Cliff's delta, DerSimonian-Laird random-effects pooling of Fisher-z
transformed correlations with the Hartung-Knapp-Sidik-Jonkman adjustment
and prediction intervals, ROC / Youden threshold selection, and a
leave-one-out multinomial logistic classifier.  The quantile and CDF
helpers at the bottom of the module stand in for a stats library.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ClassTooSmall,
    ConstantInput,
    DegenerateRho,
    EmptyGroup,
    InvalidP,
    NearSingular,
    NonConvergence,
    OutOfDomain,
    SingleClass,
    TooFewPairs,
    TooFewStudies,
)

_EXACT_MW_LIMIT = 12  # full enumeration below this combined sample size


@dataclass
class CorrelationResult:
    coefficient: float
    p_value: float
    n: int
    method: str


@dataclass
class BootstrapCI:
    point: float
    lower: float
    upper: float
    iterations: int
    seed: int
    skipped: int = 0


@dataclass
class MannWhitneyResult:
    """min(U1, U2) with the direction of the larger rank-sum group."""

    u: float
    p_value: float
    u_first: float  # pair-count U of the first group (#{a > b} + 0.5 ties)
    larger: str  # "a", "b" or "tie"


@dataclass
class MetaAnalysisResult:
    k: int
    pooled_rho: float
    tau2: float
    i2: float
    q_stat: float
    dl_ci: tuple[float, float]
    hksj_ci: tuple[float, float] | None = None
    hksj_p: float | None = None
    prediction_interval: tuple[float, float] | None = None


@dataclass
class RocResult:
    auc: float
    optimal_threshold: float
    sensitivity: float
    specificity: float
    n_pos: int
    n_neg: int


@dataclass
class LosoResult:
    accuracy: float
    per_class_recall: dict
    coefficients: np.ndarray  # mean |softmax weight| per feature
    classes: list


# --- rank helpers ---

def _rankdata(a: np.ndarray) -> np.ndarray:
    """Average ranks, 1-based; ties share the mean of their ordinal ranks."""
    a = np.asarray(a, dtype=np.float64)
    order = np.argsort(a, kind="mergesort")
    ordinal = np.empty(len(a), dtype=np.float64)
    ordinal[order] = np.arange(1, len(a) + 1, dtype=np.float64)
    _, inverse, counts = np.unique(a, return_inverse=True, return_counts=True)
    sums = np.bincount(inverse, weights=ordinal)
    return (sums / counts)[inverse]


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float((dx * dx).sum())
    syy = float((dy * dy).sum())
    if sxx < 1e-300 or syy < 1e-300:
        raise ConstantInput("variable has zero variance")
    r = float((dx * dy).sum()) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def _t_based_p(r: float, df: int) -> float:
    if df <= 0:
        return 1.0
    if 1.0 - r * r < 1e-15:
        return 0.0
    t = r * math.sqrt(df / (1.0 - r * r))
    return min(1.0, 2.0 * student_t_sf(abs(t), df))


def _check_pair_lengths(x, y, minimum: int) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise TooFewPairs("x and y must be 1-D and the same length")
    if len(x) < minimum:
        raise TooFewPairs(f"need at least {minimum} pairs, got {len(x)}")
    return x, y


# --- correlations ---

def spearman(x, y) -> CorrelationResult:
    """Spearman rho with average-rank ties; two-sided p via the t approximation."""
    x, y = _check_pair_lengths(x, y, 3)
    rho = _pearson(_rankdata(x), _rankdata(y))
    return CorrelationResult(rho, _t_based_p(rho, len(x) - 2), len(x), "spearman")


def kendall_tau(x, y) -> CorrelationResult:
    """Kendall tau-b with tie correction and normal-approximation p."""
    x, y = _check_pair_lengths(x, y, 3)
    n = len(x)
    dx = np.sign(x[:, None] - x[None, :])
    dy = np.sign(y[:, None] - y[None, :])
    iu = np.triu_indices(n, k=1)
    s = float((dx[iu] * dy[iu]).sum())

    def tie_stats(v):
        _, counts = np.unique(v, return_counts=True)
        t = counts.astype(np.float64)
        return ((t * (t - 1)).sum() / 2.0,
                (t * (t - 1) * (2 * t + 5)).sum(),
                (t * (t - 1) * (t - 2)).sum())

    n0 = n * (n - 1) / 2.0
    tx, vx, wx = tie_stats(x)
    ty, vy, wy = tie_stats(y)
    denom = math.sqrt((n0 - tx) * (n0 - ty))
    if denom < 1e-300:
        raise ConstantInput("all values tied in x or y")
    tau = min(1.0, max(-1.0, s / denom))

    var_s = (n * (n - 1) * (2 * n + 5) - vx - vy) / 18.0
    if n > 2:
        var_s += wx * wy / (9.0 * n * (n - 1) * (n - 2))
    var_s += (2.0 * tx) * (2.0 * ty) / (2.0 * n * (n - 1))
    if var_s <= 0:
        p = 1.0
    else:
        z = s / math.sqrt(var_s)
        p = min(1.0, 2.0 * (1.0 - normal_cdf(abs(z))))
    return CorrelationResult(tau, p, n, "kendall")


def partial_spearman(x, y, z) -> CorrelationResult:
    """Rank-based partial correlation of x and y controlling for z."""
    x, y = _check_pair_lengths(x, y, 4)
    z = np.asarray(z, dtype=np.float64)
    if z.shape != x.shape:
        raise TooFewPairs("x, y and z must be the same length")
    rx, ry, rz = _rankdata(x), _rankdata(y), _rankdata(z)
    r_xy = _pearson(rx, ry)
    r_xz = _pearson(rx, rz)
    r_yz = _pearson(ry, rz)
    if abs(r_xz) > 1.0 - 1e-12 or abs(r_yz) > 1.0 - 1e-12:
        raise NearSingular("controlling variable is collinear with x or y")
    r = (r_xy - r_xz * r_yz) / math.sqrt((1.0 - r_xz ** 2) * (1.0 - r_yz ** 2))
    r = min(1.0, max(-1.0, r))
    return CorrelationResult(r, _t_based_p(r, len(x) - 3), len(x), "partial_spearman")


# --- bootstrap ---

def _philox(seed: int, stream: int) -> np.random.Generator:
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF), np.uint64(stream)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _coefficient_fn(statistic):
    if callable(statistic):
        return statistic
    if statistic == "spearman":
        return lambda x, y: _pearson(_rankdata(x), _rankdata(y))
    if statistic == "kendall":
        return lambda x, y: kendall_tau(x, y).coefficient
    raise ValueError(f"unknown statistic selector {statistic!r}")


def bootstrap_ci(pairs, statistic="spearman", iterations: int = 1000,
                 seed: int = 42) -> BootstrapCI:
    """Percentile bootstrap over resampled (x, y) pairs.

    Each iteration draws from its own counter-based stream keyed on
    (seed, iteration), so results do not depend on evaluation order.
    Resamples with constant x or y are redrawn up to 100 times, then the
    iteration is skipped and counted.
    """
    pairs = list(pairs)
    if len(pairs) < 3:
        raise TooFewPairs(f"need at least 3 pairs, got {len(pairs)}")
    if iterations < 1:
        raise InvalidP("iterations must be >= 1")
    x = np.asarray([p[0] for p in pairs], dtype=np.float64)
    y = np.asarray([p[1] for p in pairs], dtype=np.float64)
    fn = _coefficient_fn(statistic)
    point = fn(x, y)

    n = len(x)
    values = []
    skipped = 0
    for i in range(iterations):
        rng = _philox(seed, i)
        value = None
        for _ in range(100):
            idx = rng.integers(0, n, n)
            try:
                value = fn(x[idx], y[idx])
                break
            except ConstantInput:
                continue
        if value is None:
            skipped += 1
        else:
            values.append(value)
    if not values:
        raise ConstantInput("every bootstrap resample was degenerate")
    lower, upper = np.percentile(values, [2.5, 97.5])
    return BootstrapCI(float(point), float(lower), float(upper),
                       iterations, seed, skipped)


# --- multiple testing ---

def bh_fdr(p_values) -> list[float]:
    """Benjamini-Hochberg step-up adjusted p-values, in input order."""
    p = np.asarray(list(p_values), dtype=np.float64)
    if p.size == 0:
        return []
    if np.any(~np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
        raise InvalidP("p-values must all lie in [0, 1]")
    m = len(p)
    order = np.argsort(p, kind="mergesort")
    scaled = p[order] * m / np.arange(1, m + 1)
    adjusted_sorted = np.minimum.accumulate(scaled[::-1])[::-1]
    adjusted = np.empty(m, dtype=np.float64)
    adjusted[order] = np.minimum(adjusted_sorted, 1.0)
    return adjusted.tolist()


# --- two-group comparisons ---

def _u_from_ranks(a: np.ndarray, b: np.ndarray) -> float:
    ranks = _rankdata(np.concatenate([a, b]))
    r1 = float(ranks[: len(a)].sum())
    return r1 - len(a) * (len(a) + 1) / 2.0


def mann_whitney(a, b) -> MannWhitneyResult:
    """Two-sided Mann-Whitney U test.

    Exact p by full enumeration of labelings when n1 + n2 <= 12 and the
    data are tie-free (p = probability of a min-U at or below the observed
    one); otherwise a normal approximation with tie and continuity
    corrections.  The reported U is min(U1, U2).
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n1, n2 = len(a), len(b)
    if n1 == 0 or n2 == 0:
        raise EmptyGroup("both groups must be non-empty")
    u1 = _u_from_ranks(a, b)
    u2 = n1 * n2 - u1
    u_min = min(u1, u2)
    larger = "a" if u1 > u2 else ("b" if u2 > u1 else "tie")

    combined = np.concatenate([a, b])
    has_ties = len(np.unique(combined)) < len(combined)
    if n1 + n2 <= _EXACT_MW_LIMIT and not has_ties:
        ranks = np.argsort(np.argsort(combined)) + 1  # tie-free: plain ranks
        total = 0
        hits = 0
        base = n1 * (n1 + 1) / 2.0
        for subset in itertools.combinations(range(n1 + n2), n1):
            u_sub = float(ranks[list(subset)].sum()) - base
            total += 1
            if min(u_sub, n1 * n2 - u_sub) <= u_min + 1e-9:
                hits += 1
        return MannWhitneyResult(u_min, hits / total, u1, larger)

    n = n1 + n2
    _, counts = np.unique(combined, return_counts=True)
    tie_term = float((counts.astype(np.float64) ** 3 - counts).sum())
    sigma2 = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if sigma2 <= 0:
        return MannWhitneyResult(u_min, 1.0, u1, larger)
    z = (u_min - n1 * n2 / 2.0 + 0.5) / math.sqrt(sigma2)
    p = min(1.0, 2.0 * normal_cdf(z))
    return MannWhitneyResult(u_min, p, u1, larger)


def cliffs_delta(a, b) -> float:
    """(#{a_i > b_j} - #{a_i < b_j}) / (|a| |b|)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if len(a) == 0 or len(b) == 0:
        raise EmptyGroup("both groups must be non-empty")
    diff = np.sign(a[:, None] - b[None, :])
    return float(diff.sum() / (len(a) * len(b)))


# --- random-effects meta-analysis ---

def _meta_z(effects) -> tuple[np.ndarray, np.ndarray]:
    effects = list(effects)
    if len(effects) < 2:
        raise TooFewStudies(f"need at least 2 studies, got {len(effects)}")
    rhos = np.asarray([e[0] for e in effects], dtype=np.float64)
    ns = np.asarray([e[1] for e in effects], dtype=np.float64)
    if np.any(ns < 4):
        raise TooFewStudies("every study needs n >= 4 for the 1/(n-3) variance")
    if np.any(np.abs(rhos) >= 1.0):
        raise DegenerateRho("cannot Fisher-transform |rho| = 1")
    return np.arctanh(rhos), 1.0 / (ns - 3.0)


def dl_meta(effects) -> MetaAnalysisResult:
    """DerSimonian-Laird random-effects pooling of (rho, n) studies.

    Correlations are Fisher z-transformed with variance 1/(n-3), pooled
    with inverse-variance weights inflated by the moment estimate of the
    between-study variance tau^2, and back-transformed with tanh.
    """
    z, v = _meta_z(effects)
    k = len(z)
    w = 1.0 / v
    z_fe = float((w * z).sum() / w.sum())
    q = float((w * (z - z_fe) ** 2).sum())
    c = float(w.sum() - (w ** 2).sum() / w.sum())
    tau2 = max(0.0, (q - (k - 1)) / c) if c > 0 else 0.0
    i2 = max(0.0, (q - (k - 1)) / q) if q > 0 else 0.0

    w_re = 1.0 / (v + tau2)
    z_re = float((w_re * z).sum() / w_re.sum())
    se_re = math.sqrt(1.0 / w_re.sum())
    z975 = normal_quantile(0.975)
    ci = (math.tanh(z_re - z975 * se_re), math.tanh(z_re + z975 * se_re))
    return MetaAnalysisResult(
        k=k, pooled_rho=math.tanh(z_re), tau2=tau2, i2=i2, q_stat=q, dl_ci=ci)


def hksj_adjust(meta: MetaAnalysisResult, effects) -> tuple[tuple[float, float], float]:
    """Hartung-Knapp-Sidik-Jonkman CI and p for a DL meta-analysis."""
    z, v = _meta_z(effects)
    k = len(z)
    w_re = 1.0 / (v + meta.tau2)
    z_re = math.atanh(meta.pooled_rho)
    q = float((w_re * (z - z_re) ** 2).sum()) / (k - 1)
    se = math.sqrt(q / w_re.sum())
    if se < 1e-150:
        p = 1.0 if abs(z_re) < 1e-150 else 0.0
        return (meta.pooled_rho, meta.pooled_rho), p
    t_crit = student_t_quantile(0.975, k - 1)
    ci = (math.tanh(z_re - t_crit * se), math.tanh(z_re + t_crit * se))
    p = min(1.0, 2.0 * student_t_sf(abs(z_re / se), k - 1))
    return ci, p


def prediction_interval(meta: MetaAnalysisResult, effects) -> tuple[float, float]:
    """Range in which a new study's correlation is expected to fall."""
    z, v = _meta_z(effects)
    k = len(z)
    if k < 3:
        raise TooFewStudies("prediction interval needs at least 3 studies")
    w_re = 1.0 / (v + meta.tau2)
    se_re2 = 1.0 / float(w_re.sum())
    z_re = math.atanh(meta.pooled_rho)
    half = student_t_quantile(0.975, k - 2) * math.sqrt(meta.tau2 + se_re2)
    return (math.tanh(z_re - half), math.tanh(z_re + half))


# --- ROC / screening ---

def roc(scores, labels, direction: str = "lower") -> RocResult:
    """ROC summary for a binary task.

    direction "lower" means low scores indicate the positive class (the
    pattern for degradation metrics); "higher" is the usual orientation.
    AUC comes from the rank (Mann-Whitney) identity; the operating point
    maximises Youden's J with ties broken toward higher specificity.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(bool)
    if scores.shape != labels.shape:
        raise SingleClass("scores and labels must be the same length")
    pos = np.sort(scores[labels])
    neg = np.sort(scores[~labels])
    if len(pos) == 0 or len(neg) == 0:
        raise SingleClass("need both positive and negative examples")
    if direction not in ("lower", "higher"):
        raise ValueError("direction must be 'lower' or 'higher'")

    auc_higher = _u_from_ranks(pos, neg) / (len(pos) * len(neg))
    auc = auc_higher if direction == "higher" else 1.0 - auc_higher

    best = None
    for threshold in np.unique(scores):
        if direction == "lower":
            sens = np.searchsorted(pos, threshold, side="right") / len(pos)
            spec = (len(neg) - np.searchsorted(neg, threshold, side="right")) / len(neg)
        else:
            sens = (len(pos) - np.searchsorted(pos, threshold, side="left")) / len(pos)
            spec = np.searchsorted(neg, threshold, side="left") / len(neg)
        j = sens + spec - 1.0
        key = (j, spec)
        if best is None or key > best[0]:
            best = (key, float(threshold), float(sens), float(spec))
    _, threshold, sens, spec = best
    return RocResult(float(auc), threshold, sens, spec, len(pos), len(neg))


# --- multinomial logistic regression with LOSO ---

def _softmax(a: np.ndarray) -> np.ndarray:
    a = a - a.max(axis=1, keepdims=True)
    e = np.exp(a)
    return e / e.sum(axis=1, keepdims=True)


_INTERCEPT_RIDGE = 1e-9  # pins the softmax gauge freedom in the intercepts


def _fit_multinomial(x: np.ndarray, y_idx: np.ndarray, n_classes: int,
                     l2: float, tol: float, max_iter: int) -> np.ndarray:
    """Damped-Newton fit of L2-penalised softmax regression.

    x already carries a leading column of ones.  The penalty applies to
    non-intercept weights; a tiny ridge on the intercepts keeps the
    Hessian positive definite.
    """
    n, d = x.shape
    k = n_classes
    onehot = np.zeros((n, k))
    onehot[np.arange(n), y_idx] = 1.0
    w = np.zeros((k, d))
    penalty = np.full((k, d), l2)
    penalty[:, 0] = _INTERCEPT_RIDGE

    def loss(weights):
        logits = x @ weights.T
        logits -= logits.max(axis=1, keepdims=True)
        log_z = np.log(np.exp(logits).sum(axis=1))
        nll = float((log_z - logits[np.arange(n), y_idx]).sum())
        return nll + 0.5 * float((penalty * weights * weights).sum())

    current = loss(w)
    for _ in range(max_iter):
        p = _softmax(x @ w.T)
        grad = (p - onehot).T @ x + penalty * w  # (k, d)
        hess = np.zeros((k * d, k * d))
        for ka in range(k):
            for kb in range(k):
                coef = p[:, ka] * ((ka == kb) - p[:, kb])
                block = x.T @ (coef[:, None] * x)
                hess[ka * d:(ka + 1) * d, kb * d:(kb + 1) * d] = block
        hess[np.arange(k * d), np.arange(k * d)] += penalty.reshape(-1)
        try:
            step = np.linalg.solve(hess, grad.reshape(-1)).reshape(k, d)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(hess, grad.reshape(-1), rcond=None)[0].reshape(k, d)
        scale = 1.0
        for _ in range(60):
            candidate = w - scale * step
            new = loss(candidate)
            if new <= current:
                break
            scale *= 0.5
        else:
            return w  # no descent direction left: converged to fp precision
        w = candidate
        if abs(current - new) <= tol:
            return w
        current = new
    raise NonConvergence(f"softmax fit did not converge within {max_iter} iterations")


def _prepare_fold(train: np.ndarray, test: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Median-impute NaNs and z-score both splits using training statistics."""
    med = np.nanmedian(train, axis=0)
    med = np.where(np.isfinite(med), med, 0.0)
    train = np.where(np.isnan(train), med, train)
    test = np.where(np.isnan(test), med, test)
    mu = train.mean(axis=0)
    sd = train.std(axis=0)
    sd = np.where(sd < 1e-12, 1.0, sd)
    return (train - mu) / sd, (test - mu) / sd


def logistic_loso(features, classes, l2: float = 1.0, tol: float = 1e-8,
                  max_iter: int = 10000) -> LosoResult:
    """Leave-one-sample-out softmax classification of profile vectors.

    NaN entries are imputed with the training-fold median before fold-wise
    z-scoring.  Coefficients come from a final full-data fit and are the
    mean absolute softmax weight per feature.
    """
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise ClassTooSmall("feature matrix must be 2-D")
    labels = list(classes)
    if len(labels) != x.shape[0]:
        raise ClassTooSmall("one class label per feature row required")
    class_names = sorted(set(labels))
    if len(class_names) < 2:
        raise ClassTooSmall("need at least 2 classes")
    index = {c: i for i, c in enumerate(class_names)}
    y = np.asarray([index[c] for c in labels], dtype=np.int64)
    for name in class_names:
        if int((y == index[name]).sum()) < 2:
            raise ClassTooSmall(f"class {name!r} has fewer than 2 members")

    n = len(y)
    predictions = np.empty(n, dtype=np.int64)
    for i in range(n):
        mask = np.ones(n, dtype=bool)
        mask[i] = False
        train_x, test_x = _prepare_fold(x[mask], x[i:i + 1])
        ones = np.ones((train_x.shape[0], 1))
        w = _fit_multinomial(np.hstack([ones, train_x]), y[mask], len(class_names),
                             l2, tol, max_iter)
        logits = np.hstack([[1.0], test_x[0]]) @ w.T
        predictions[i] = int(np.argmax(logits))

    accuracy = float((predictions == y).mean())
    recall = {}
    for name in class_names:
        member = y == index[name]
        recall[name] = float((predictions[member] == y[member]).mean())

    full_x, _ = _prepare_fold(x, x[:1])
    ones = np.ones((n, 1))
    w = _fit_multinomial(np.hstack([ones, full_x]), y, len(class_names), l2, tol, max_iter)
    coefficients = np.abs(w[:, 1:]).mean(axis=0)
    return LosoResult(accuracy, recall, coefficients, class_names)


# --- distribution helpers ---

def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


# Acklam's rational approximation for the inverse normal CDF; two Newton
# refinements take it to full double precision.
_ACKLAM_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
             1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_ACKLAM_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
             6.680131188771972e+01, -1.328068155288572e+01)
_ACKLAM_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
             -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_ACKLAM_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
             3.754408661907416e+00)


def normal_quantile(p: float) -> float:
    """Inverse standard normal CDF, accurate to better than 1e-10."""
    if not 0.0 < p < 1.0:
        raise OutOfDomain(f"p must be in (0, 1), got {p}")
    a, b, c, d = _ACKLAM_A, _ACKLAM_B, _ACKLAM_C, _ACKLAM_D
    p_low, p_high = 0.02425, 1 - 0.02425
    if p < p_low:
        q = math.sqrt(-2 * math.log(p))
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1)
    elif p <= p_high:
        q = p - 0.5
        r = q * q
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q / \
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1)
    else:
        q = math.sqrt(-2 * math.log(1 - p))
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1)
    for _ in range(2):
        err = normal_cdf(x) - p
        pdf = math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)
        if pdf < 1e-300:
            break
        x -= err / pdf
    return x


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 400):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            return h
    return h


def betainc_reg(a: float, b: float, x: float) -> float:
    """Regularised incomplete beta function I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_bt = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
             + a * math.log(x) + b * math.log1p(-x))
    bt = math.exp(ln_bt)
    if x < (a + 1.0) / (a + b + 2.0):
        return bt * _betacf(a, b, x) / a
    return 1.0 - bt * _betacf(b, a, 1.0 - x) / b


def student_t_sf(t: float, df: int) -> float:
    """P(T > t) for Student's t with df degrees of freedom."""
    if df < 1:
        raise OutOfDomain(f"df must be >= 1, got {df}")
    if t < 0:
        return 1.0 - student_t_sf(-t, df)
    x = df / (df + t * t)
    return 0.5 * betainc_reg(df / 2.0, 0.5, x)


def student_t_cdf(t: float, df: int) -> float:
    return 1.0 - student_t_sf(t, df)


def student_t_quantile(p: float, df: int) -> float:
    """Inverse CDF of Student's t, found by bisection on the CDF."""
    if not 0.0 < p < 1.0:
        raise OutOfDomain(f"p must be in (0, 1), got {p}")
    if df < 1:
        raise OutOfDomain(f"df must be >= 1, got {df}")
    if p == 0.5:
        return 0.0
    if p < 0.5:
        return -student_t_quantile(1.0 - p, df)
    hi = max(2.0, abs(normal_quantile(p)) * 2.0)
    while student_t_cdf(hi, df) < p and hi < 1e200:
        hi *= 4.0
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if student_t_cdf(mid, df) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
