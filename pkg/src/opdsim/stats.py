"""Fixed-effects ANOVA, Tukey HSD, and trend classification of mean profiles.

The F and studentized-range distributions are evaluated by adaptive
quadrature (``scipy.integrate.quad``); no closed-form CDFs are used.
"""

from dataclasses import dataclass
import itertools
import logging
import math

import numpy as np
from scipy import integrate, optimize, special

log = logging.getLogger(__name__)

FACTOR_NAMES = ("clutter_type", "window", "n_obstacles")


# --- distributions --------------------------------------------------------------

def _beta_integral(a, b, lo, hi):
    """Integral of the Beta(a, b) density over [lo, hi] touching one endpoint of [0, 1]."""
    log_norm = special.betaln(a, b)
    if lo == 0.0:
        val, _ = integrate.quad(lambda u: (1.0 - u) ** (b - 1.0), 0.0, hi, weight="alg", wvar=(a - 1.0, 0.0),
                                epsabs=0.0, epsrel=1e-12, limit=200)
    else:
        val, _ = integrate.quad(lambda u: u ** (a - 1.0), lo, 1.0, weight="alg", wvar=(0.0, b - 1.0),
                                epsabs=0.0, epsrel=1e-12, limit=200)
    return val * math.exp(-log_norm)


def f_sf(f, dfn, dfd):
    """P(F > f) for an F(dfn, dfd) variable."""
    if math.isnan(f):
        return math.nan
    if f <= 0:
        return 1.0
    if math.isinf(f):
        return 0.0
    # P(F > f) = I_z(dfd/2, dfn/2) with z = dfd / (dfd + dfn f)
    a, b = dfd / 2.0, dfn / 2.0
    z = dfd / (dfd + dfn * f)
    if z <= 0.5:
        p = _beta_integral(a, b, 0.0, z)
    else:
        p = 1.0 - _beta_integral(a, b, z, 1.0)
    return min(1.0, max(0.0, p))


def _range_integrand(k, w, z):
    return math.exp(-0.5 * z * z) * np.clip(special.ndtr(z) - special.ndtr(z - w), 0.0, None) ** (k - 1)


def _range_integrand_scalar(k, w, z):
    # math.erfc is far cheaper than a numpy ufunc call on one value
    inner = 0.5 * (math.erfc(-z * _RSQRT2) - math.erfc((w - z) * _RSQRT2))
    return math.exp(-0.5 * z * z) * max(inner, 0.0) ** (k - 1)


_RSQRT2 = 1.0 / math.sqrt(2.0)


def _range_cdf_normal(w, k):
    """P(range of k iid N(0,1) <= w); ``w`` is a float or an array."""
    scale = k / math.sqrt(2.0 * math.pi)
    if np.ndim(w) == 0:
        val, _ = integrate.quad(lambda z: _range_integrand_scalar(k, w, z), -math.inf, math.inf,
                                epsabs=1e-13, epsrel=1e-11, limit=200)
        return min(1.0, scale * val)
    val, _ = integrate.quad_vec(lambda z: _range_integrand(k, w, z), -math.inf, math.inf,
                                epsabs=1e-13, epsrel=1e-11, limit=400)
    return np.minimum(1.0, scale * val)


def _studentized_range_cdf_pos(w, k, df):
    """CDF at positive ``w`` (float or array)."""
    if math.isinf(df):
        return _range_cdf_normal(w, k)
    # S = sqrt(chi2_df / df); integrate P(range <= q s) against the density of S
    half = df / 2.0
    log_c = half * math.log(df) - special.gammaln(half) - (half - 1.0) * math.log(2.0)

    def h(s):
        if s <= 0:
            return 0.0 * w
        return math.exp(log_c + (df - 1.0) * math.log(s) - 0.5 * df * s * s) * _range_cdf_normal(w * s, k)

    mode = math.sqrt((df - 1.0) / df) if df > 1 else 0.5
    hi = mode + 40.0 / math.sqrt(2.0 * df) + 2.0
    if np.ndim(w) == 0:
        val, _ = integrate.quad(h, 0.0, hi, points=[mode], epsabs=1e-12, epsrel=1e-10, limit=200)
    else:
        val, _ = integrate.quad_vec(h, 0.0, hi, points=[mode], epsabs=1e-12, epsrel=1e-10, limit=400)
    return np.clip(val, 0.0, 1.0)


def studentized_range_cdf(q, k, df):
    """P(Q <= q) for the studentized range of ``k`` means with ``df`` error degrees of freedom.

    An array ``q`` is integrated in one vectorized pass.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if np.ndim(q) == 0:
        q = float(q)
        return float(_studentized_range_cdf_pos(q, k, df)) if q > 0 else 0.0
    q_arr = np.asarray(q, dtype=np.float64)
    out = np.zeros(q_arr.shape)
    pos = q_arr > 0
    if pos.any():
        out[pos] = _studentized_range_cdf_pos(q_arr[pos], k, df)
    return out


def studentized_range_sf(q, k, df):
    return 1.0 - studentized_range_cdf(q, k, df)


def studentized_range_ppf(p, k, df):
    """Quantile: the q with P(Q <= q) = p."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    hi = 8.0
    while studentized_range_cdf(hi, k, df) < p:
        hi *= 2.0
    return optimize.brentq(lambda q: studentized_range_cdf(q, k, df) - p, 0.0, hi, xtol=1e-10)


# --- samples and summaries --------------------------------------------------------

@dataclass
class GroupedSample:
    groups: list  # (label, observations)

    def __post_init__(self):
        self.groups = [(label, np.asarray(obs, dtype=np.float64).ravel()) for label, obs in self.groups]

    @classmethod
    def from_rows(cls, rows, group_by, response="length"):
        grouped = {}
        for r in rows:
            grouped.setdefault(_group_key(r, group_by), []).append(float(r[response]))
        return cls(sorted(grouped.items(), key=lambda kv: _sort_key(kv[0])))

    def nonempty(self):
        kept = []
        for label, obs in self.groups:
            if len(obs) == 0:
                log.warning("group %s is empty; excluded", label)
            else:
                kept.append((label, obs))
        return kept


def _group_key(row, group_by):
    if isinstance(group_by, str):
        return row[group_by]
    return tuple(row[g] for g in group_by)


def _sort_key(label):
    items = label if isinstance(label, tuple) else (label,)
    return tuple((0, v, "") if isinstance(v, (int, float)) else (1, 0, str(v)) for v in items)


def records_to_rows(records):
    """Plain dicts (as read back from a results file) for ExperimentRecord objects."""
    return [{"clutter_type": r.combo.clutter_name, "window": r.combo.window_code,
             "n_obstacles": r.combo.n_obstacles, "replicate": r.replicate,
             "length": r.traversal_length, "n_disamb": r.n_disambiguations} for r in records]


@dataclass(frozen=True)
class SummaryRow:
    group: object
    n: int
    mean: float
    sd: float  # NaN when n == 1
    se: float


def summarize(data, group_by=None, response="length"):
    """Per-group n, mean, sd, and standard error, from rows or a GroupedSample."""
    sample = data if isinstance(data, GroupedSample) else GroupedSample.from_rows(data, group_by, response)
    out = []
    for label, obs in sample.nonempty():
        n = len(obs)
        sd = float(np.std(obs, ddof=1)) if n > 1 else math.nan
        out.append(SummaryRow(label, n, float(np.mean(obs)), sd, sd / math.sqrt(n) if n > 1 else math.nan))
    return out


def pooled_se(summary):
    """Standard error of a single group mean using the pooled within-group variance."""
    dof = sum(r.n - 1 for r in summary)
    if dof <= 0:
        return math.nan
    var = sum((r.n - 1) * r.sd ** 2 for r in summary if r.n > 1) / dof
    return math.sqrt(var * float(np.mean([1.0 / r.n for r in summary])))


# --- ANOVA ------------------------------------------------------------------------

@dataclass(frozen=True)
class AnovaRow:
    source: str
    ss: float
    df: int
    ms: float = math.nan
    f: float = math.nan
    p: float = math.nan


@dataclass
class AnovaTable:
    rows: list  # effects, then "Residual", then "Total"

    def __getitem__(self, source):
        for r in self.rows:
            if r.source == source:
                return r
        raise KeyError(source)

    @property
    def effects(self):
        return [r for r in self.rows if r.source not in ("Residual", "Total")]

    def format(self):
        lines = [f"{'source':<28}{'SS':>16}{'df':>8}{'MS':>16}{'F':>12}{'p':>12}"]
        for r in self.rows:
            def num(v, spec):
                return "" if isinstance(v, float) and math.isnan(v) else format(v, spec)
            lines.append(f"{r.source:<28}{r.ss:>16.6g}{r.df:>8d}{num(r.ms, '>16.6g')}"
                         f"{num(r.f, '>12.5g')}{num(r.p, '>12.4g')}")
        return "\n".join(lines)


def _f_test(ms_effect, ms_error, df_effect, df_error):
    if ms_error > 0:
        f = ms_effect / ms_error
        return f, f_sf(f, df_effect, df_error)
    if ms_effect > 0:
        return math.inf, 0.0
    return math.nan, math.nan


def oneway_anova(sample):
    groups = sample.nonempty() if isinstance(sample, GroupedSample) else GroupedSample(sample).nonempty()
    k = len(groups)
    n = sum(len(g) for _, g in groups)
    if k < 2:
        raise ValueError("one-way ANOVA needs at least two nonempty groups")
    if n <= k:
        raise ValueError("one-way ANOVA needs more observations than groups")
    allobs = np.concatenate([g for _, g in groups])
    grand = float(np.mean(allobs))
    ss_between = float(sum(len(g) * (np.mean(g) - grand) ** 2 for _, g in groups))
    ss_within = float(sum(np.sum((g - np.mean(g)) ** 2) for _, g in groups))
    ss_total = float(np.sum((allobs - grand) ** 2))
    df_b, df_w = k - 1, n - k
    ms_b, ms_w = ss_between / df_b, ss_within / df_w
    if ss_between == 0.0 and ms_w > 0:
        f, p = 0.0, 1.0
    else:
        f, p = _f_test(ms_b, ms_w, df_b, df_w)
    return AnovaTable([
        AnovaRow("Between", ss_between, df_b, ms_b, f, p),
        AnovaRow("Residual", ss_within, df_w, ms_w),
        AnovaRow("Total", ss_total, n - 1),
    ])


def factorial_anova(rows, factors, response="length", include_interactions=True):
    """Balanced fixed-effects ANOVA for up to three factors.

    With ``include_interactions`` the full factorial model is fitted (every
    interaction, residual = within-cell); otherwise the additive model.
    """
    factors = list(factors)
    if not 1 <= len(factors) <= 3:
        raise ValueError("between one and three factors are supported")
    levels = [sorted({r[f] for r in rows}, key=lambda v: _sort_key(v)) for f in factors]
    index = [{v: i for i, v in enumerate(lv)} for lv in levels]
    shape = tuple(len(lv) for lv in levels)
    single = [f for f, lv in zip(factors, levels) if len(lv) < 2]
    if single:
        raise ValueError(f"factor(s) with a single level: {', '.join(single)}")
    cells = {}
    for r in rows:
        cells.setdefault(tuple(index[d][r[f]] for d, f in enumerate(factors)), []).append(float(r[response]))
    counts = {len(v) for v in cells.values()}
    if len(cells) != int(np.prod(shape)) or len(counts) != 1:
        raise ValueError("factorial_anova needs a balanced design (every cell present with equal counts); "
                         "subset the records to a balanced block first")
    m = counts.pop()
    y = np.empty(shape + (m,))
    for key, obs in cells.items():
        y[key] = obs
    n_total = y.size
    grand = y.mean()
    ss_total = float(np.sum((y - grand) ** 2))
    if include_interactions and m < 2:
        raise ValueError("one observation per cell leaves no error degrees of freedom for the interaction model")

    cell_mean = y.mean(axis=-1)
    dims = range(len(factors))
    subsets = [s for r in range(1, len(factors) + 1) for s in itertools.combinations(dims, r)]
    if not include_interactions:
        subsets = [s for s in subsets if len(s) == 1]

    def marginal(keep):
        drop = tuple(d for d in dims if d not in keep)
        return cell_mean.mean(axis=drop, keepdims=True) if drop else cell_mean

    effect_rows = []
    ss_model = 0.0
    for sub in subsets:
        eff = np.zeros_like(cell_mean)
        for r in range(len(sub) + 1):
            for part in itertools.combinations(sub, r):
                eff = eff + (-1) ** (len(sub) - r) * np.broadcast_to(marginal(part), cell_mean.shape)
        ss = float(m * np.sum(eff ** 2))
        df = int(np.prod([shape[d] - 1 for d in sub]))
        ss_model += ss
        effect_rows.append((":".join(factors[d] for d in sub), ss, df))

    df_model = sum(df for _, _, df in effect_rows)
    if include_interactions:
        ss_res = float(np.sum((y - cell_mean[..., None]) ** 2))
    else:
        ss_res = max(0.0, ss_total - ss_model)
    df_res = n_total - 1 - df_model
    if df_res <= 0:
        raise ValueError("no residual degrees of freedom")
    ms_res = ss_res / df_res
    out = []
    for name, ss, df in effect_rows:
        ms = ss / df
        f, p = _f_test(ms, ms_res, df, df_res)
        out.append(AnovaRow(name, ss, df, ms, f, p))
    out.append(AnovaRow("Residual", ss_res, df_res, ms_res))
    out.append(AnovaRow("Total", ss_total, n_total - 1))
    return AnovaTable(out)


# --- Tukey HSD --------------------------------------------------------------------

@dataclass(frozen=True)
class HsdPair:
    group_a: object
    group_b: object
    diff: float  # mean_a - mean_b
    lo: float
    hi: float
    p_adj: float

    @property
    def significant(self):
        return not (self.lo <= 0.0 <= self.hi)


@dataclass
class HsdResult:
    pairs: list
    q_crit: float
    alpha: float
    df_error: int
    mse: float

    def csv_lines(self):
        lines = ["group_a,group_b,diff,lo,hi,p_adj"]
        for p in self.pairs:
            lines.append(f"{_label(p.group_a)},{_label(p.group_b)},{p.diff!r},{p.lo!r},{p.hi!r},{p.p_adj!r}")
        return lines


def _label(g):
    return ":".join(str(v) for v in g) if isinstance(g, tuple) else str(g)


def tukey_hsd(sample, alpha=0.05):
    """All pairwise Tukey-Kramer intervals at family-wise level 1 - alpha."""
    groups = sample.nonempty() if isinstance(sample, GroupedSample) else GroupedSample(sample).nonempty()
    k = len(groups)
    if k < 2:
        raise ValueError("Tukey HSD needs at least two groups")
    table = oneway_anova(GroupedSample(groups))
    mse, df = table["Residual"].ms, table["Residual"].df
    q_crit = studentized_range_ppf(1.0 - alpha, k, df)
    combos = list(itertools.combinations(groups, 2))
    diffs = np.array([np.mean(a) - np.mean(b) for (_, a), (_, b) in combos])
    ses = np.array([math.sqrt(mse / 2.0 * (1.0 / len(a) + 1.0 / len(b))) for (_, a), (_, b) in combos])
    if mse > 0:
        p_adj = 1.0 - studentized_range_cdf(np.abs(diffs) / ses, k, df)
    else:
        p_adj = np.where(diffs != 0, 0.0, 1.0)
    pairs = []
    for ((la, _), (lb, _)), diff, se, p in zip(combos, diffs.tolist(), ses.tolist(), p_adj.tolist()):
        half = q_crit * se
        pairs.append(HsdPair(la, lb, diff, diff - half, diff + half, min(1.0, max(0.0, p))))
    return HsdResult(pairs, q_crit, alpha, df, mse)


# --- trends and best performers -----------------------------------------------------

TRENDS = ("increasing", "concave_down", "flat", "other")


def trend_check(means, se=0.0):
    """Classify an ordered profile of means with tolerance ``se``.

    flat: max - min <= se. increasing: no step falls by more than se, the
    profile gains more than se overall, and it ends within se of its max.
    concave_down: the max is interior and exceeds both ends by more than se.
    """
    m = np.asarray(means, dtype=np.float64)
    if len(m) < 3:
        raise ValueError("trend_check needs at least three levels")
    tol = float(se) if se and not math.isnan(se) else 0.0
    top = int(np.argmax(m))
    if m.max() - m.min() <= tol:
        return "flat"
    if 0 < top < len(m) - 1 and m[top] - m[0] > tol and m[top] - m[-1] > tol:
        return "concave_down"
    steps = np.diff(m)
    if tol == 0.0:
        if np.all(steps > 0):
            return "increasing"
    elif np.all(steps >= -tol) and m[-1] - m[0] > tol and m.max() - m[-1] <= tol:
        return "increasing"
    return "other"


def peak_index(means):
    return int(np.argmax(np.asarray(means, dtype=np.float64)))


def best_performers(summary):
    """Per clutter type, the (window, count) group with the largest mean.

    ``summary`` rows must be grouped by (clutter_type, window, n_obstacles).
    """
    best = {}
    for row in summary:
        ct = row.group[0]
        if ct not in best or row.mean > best[ct].mean:
            best[ct] = row
    return best
