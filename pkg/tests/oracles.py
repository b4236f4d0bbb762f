"""Independent brute-force oracles.

Everything here is written naively (explicit loops, direct summation) and on
purpose shares no code with the package: these are the reference
implementations the fast paths are checked against.
"""

import math

import numpy as np


# ---------------------------------------------------------------------------
# histograms / KL

def smoothed_histogram(values, bins=256, eps=1e-10):
    counts = [0] * bins
    for v in values:
        counts[int(v)] += 1
    total = sum(counts) + bins * eps
    return [(c + eps) / total for c in counts]


def kl_direct(p, q):
    return sum(pi * math.log(pi / qi) for pi, qi in zip(p, q))


def klbf_direct(image, mask, bins=256, eps=1e-10):
    """image: (H, W, 3) uint8, mask: (H, W) {0,1}. Returns per-channel + mean."""
    h, w = mask.shape
    per_channel = []
    for c in range(3):
        fg_vals, bg_vals = [], []
        for i in range(h):
            for j in range(w):
                (fg_vals if mask[i, j] == 1 else bg_vals).append(image[i, j, c])
        p = smoothed_histogram(bg_vals, bins, eps)
        q = smoothed_histogram(fg_vals, bins, eps)
        per_channel.append(kl_direct(p, q))
    return per_channel, sum(per_channel) / 3


# ---------------------------------------------------------------------------
# SSIM

def ssim_direct(a, b, window=11, sigma=1.5, k1=0.01, k2=0.03, drange=255):
    """Direct per-window summation on luminance arrays (H, W) float."""
    half = (window - 1) / 2
    coords = [i - half for i in range(window)]
    g1 = [math.exp(-(c ** 2) / (2 * sigma ** 2)) for c in coords]
    weights = [[g1[i] * g1[j] for j in range(window)] for i in range(window)]
    wsum = sum(sum(row) for row in weights)
    weights = [[wij / wsum for wij in row] for row in weights]

    c1 = (k1 * drange) ** 2
    c2 = (k2 * drange) ** 2
    h, w = a.shape
    values = []
    for top in range(h - window + 1):
        for left in range(w - window + 1):
            mu_a = mu_b = 0.0
            for i in range(window):
                for j in range(window):
                    mu_a += weights[i][j] * a[top + i, left + j]
                    mu_b += weights[i][j] * b[top + i, left + j]
            var_a = var_b = cov = 0.0
            for i in range(window):
                for j in range(window):
                    da = a[top + i, left + j] - mu_a
                    db = b[top + i, left + j] - mu_b
                    var_a += weights[i][j] * da * da
                    var_b += weights[i][j] * db * db
                    cov += weights[i][j] * da * db
            values.append(((2 * mu_a * mu_b + c1) * (2 * cov + c2))
                          / ((mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2)))
    return sum(values) / len(values)


# ---------------------------------------------------------------------------
# feature statistics

def gaussian_stats_two_pass(data):
    n, d = data.shape
    mean = [sum(data[i][j] for i in range(n)) / n for j in range(d)]
    cov = [[0.0] * d for _ in range(d)]
    for a in range(d):
        for b in range(d):
            cov[a][b] = sum((data[i][a] - mean[a]) * (data[i][b] - mean[b])
                            for i in range(n)) / (n - 1)
    return np.array(mean), np.array(cov)


def mmd2_direct(x, y, degree, gamma, coef0):
    def k(a, b):
        return (gamma * float(np.dot(a, b)) + coef0) ** degree

    m, n = len(x), len(y)
    sx = sum(k(x[i], x[j]) for i in range(m) for j in range(m) if i != j)
    sy = sum(k(y[i], y[j]) for i in range(n) for j in range(n) if i != j)
    sxy = sum(k(x[i], y[j]) for i in range(m) for j in range(n))
    return sx / (m * (m - 1)) + sy / (n * (n - 1)) - 2 * sxy / (m * n)


def frechet_high_precision(mu1, cov1, mu2, cov2, dps=60):
    """Extended-precision Fréchet distance via eigenvalues of cov1 @ cov2."""
    import mpmath

    with mpmath.workdps(dps):
        product = mpmath.matrix((np.asarray(cov1) @ np.asarray(cov2)).tolist())
        eigvals = mpmath.eig(product, left=False, right=False)
        trace_sqrt = mpmath.mpf(0)
        for lam in eigvals:
            lam_re = mpmath.re(lam)
            if lam_re > 0:
                trace_sqrt += mpmath.sqrt(lam_re)
        diff = np.asarray(mu1) - np.asarray(mu2)
        dist = (float(np.dot(diff, diff))
                + float(np.trace(cov1)) + float(np.trace(cov2))
                - 2 * float(trace_sqrt))
    return max(dist, 0.0)


# ---------------------------------------------------------------------------
# retrieval

def argmax_remove_topk(target, ids, embeddings, k):
    """Literal transcription of the retrieval loop: score all, then repeat
    argmax-and-remove k times."""
    def cosine(a, b):
        na = math.sqrt(sum(v * v for v in a))
        nb = math.sqrt(sum(v * v for v in b))
        return sum(ai * bi for ai, bi in zip(a, b)) / (na * nb)

    scores = {ids[i]: cosine(target, embeddings[i]) for i in range(len(ids))}
    picked = []
    pool = dict(scores)
    for _ in range(k):
        best = max(pool, key=lambda rid: pool[rid])
        picked.append((best, pool[best]))
        del pool[best]
    return picked


def masked_pool_direct(grid, cell_mask):
    """Mean of cells flagged by a precomputed binary cell mask."""
    total = None
    count = 0
    gh, gw, d = grid.shape
    for i in range(gh):
        for j in range(gw):
            if cell_mask[i][j]:
                vec = grid[i, j]
                total = vec.astype(np.float64).copy() if total is None else total + vec
                count += 1
    return total / count


# ---------------------------------------------------------------------------
# COD metrics (reference-formula implementations, per-pixel loops)

def mae_direct(pred, gt):
    h, w = gt.shape
    return sum(abs(float(pred[i, j]) - float(gt[i, j]))
               for i in range(h) for j in range(w)) / (h * w)


def _binarize_adaptive(pred):
    thr = min(1.0, 2 * float(np.mean(pred)))
    if thr > 0:
        return pred >= thr
    return pred > 0


def f_direct(pred, gt, beta2=0.3):
    binary = _binarize_adaptive(pred)
    tp = fp = fn = 0
    h, w = gt.shape
    for i in range(h):
        for j in range(w):
            if binary[i, j] and gt[i, j]:
                tp += 1
            elif binary[i, j]:
                fp += 1
            elif gt[i, j]:
                fn += 1
    if tp == 0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return (1 + beta2) * precision * recall / (beta2 * precision + recall)


def s_direct(pred, gt, alpha=0.5):
    eps = np.spacing(1)
    gtf = gt.astype(np.float64)
    n_fg = int(gt.sum())
    if n_fg == 0:
        return 1 - float(np.mean(pred))
    if n_fg == gt.size:
        return float(np.mean(pred))

    def object_score(values):
        x = float(np.mean(values))
        sx = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
        return 2 * x / (x * x + 1 + sx + eps)

    u = float(np.mean(gtf))
    s_obj = (u * object_score(pred[gt == 1])
             + (1 - u) * object_score(1 - pred[gt == 0]))

    coords = np.argwhere(gt)
    cy = int(round(coords[:, 0].mean())) + 1
    cx = int(round(coords[:, 1].mean())) + 1
    h, w = gt.shape

    def quad_ssim(p, g):
        n = p.size
        if n == 0:
            return 0.0, 0.0
        x, y = float(np.mean(p)), float(np.mean(g))
        if n > 1:
            sx = float(np.sum((p - x) ** 2)) / (n - 1)
            sy = float(np.sum((g - y) ** 2)) / (n - 1)
            sxy = float(np.sum((p - x) * (g - y))) / (n - 1)
        else:
            sx = sy = sxy = 0.0
        a = 4 * x * y * sxy
        b = (x * x + y * y) * (sx + sy)
        if a != 0:
            return a / (b + eps), n
        return (1.0 if b == 0 else 0.0), n

    s_reg = 0.0
    for rs, cs in (((0, cy), (0, cx)), ((0, cy), (cx, w)),
                   ((cy, h), (0, cx)), ((cy, h), (cx, w))):
        p = pred[rs[0]:rs[1], cs[0]:cs[1]]
        g = gtf[rs[0]:rs[1], cs[0]:cs[1]]
        score, n = quad_ssim(p, g)
        s_reg += score * (n / gt.size)
    return max(alpha * s_obj + (1 - alpha) * s_reg, 0.0)


def e_direct(pred, gt):
    """Mean over 256 thresholds of the per-pixel enhanced alignment score.

    Threshold 0 counts only strictly positive predictions as foreground.
    """
    h, w = gt.shape
    n = h * w
    n_gt = int(gt.sum())
    scores = []
    for t_idx in range(256):
        t = t_idx / 255.0
        if t > 0:
            binary = pred >= t
        else:
            binary = pred > 0
        if n_gt == 0:
            scores.append(1 - float(np.mean(binary)))
            continue
        if n_gt == n:
            scores.append(float(np.mean(binary)))
            continue
        mu_fm = float(np.mean(binary))
        mu_gt = float(np.mean(gt))
        total = 0.0
        for i in range(h):
            for j in range(w):
                xi_fm = (1.0 if binary[i, j] else 0.0) - mu_fm
                xi_gt = (1.0 if gt[i, j] else 0.0) - mu_gt
                denom = xi_fm ** 2 + xi_gt ** 2
                phi = 2 * xi_fm * xi_gt / denom if denom > 0 else 0.0
                total += (1 + phi) ** 2 / 4
        scores.append(total / n)
    return sum(scores) / 256


def wf_direct(pred, gt, beta2=1.0):
    """Weighted F with explicit nearest-foreground search and direct 7x7 blur."""
    eps = np.spacing(1)
    h, w = gt.shape
    gtf = gt.astype(np.float64)
    fg = [(i, j) for i in range(h) for j in range(w) if gt[i, j]]

    error = np.abs(pred - gtf)
    et = error.copy()
    dist = np.zeros((h, w))
    for i in range(h):
        for j in range(w):
            if not gt[i, j]:
                best = min(fg, key=lambda p: (p[0] - i) ** 2 + (p[1] - j) ** 2)
                dist[i, j] = math.sqrt((best[0] - i) ** 2 + (best[1] - j) ** 2)
                et[i, j] = error[best]

    sigma = 5.0
    kernel = [[math.exp(-((di - 3) ** 2 + (dj - 3) ** 2) / (2 * sigma ** 2))
               for dj in range(7)] for di in range(7)]
    ks = sum(sum(row) for row in kernel)
    kernel = [[v / ks for v in row] for row in kernel]
    ea = np.zeros((h, w))
    for i in range(h):
        for j in range(w):
            acc = 0.0
            for di in range(7):
                for dj in range(7):
                    ii, jj = i + di - 3, j + dj - 3
                    if 0 <= ii < h and 0 <= jj < w:
                        acc += kernel[di][dj] * et[ii, jj]
            ea[i, j] = acc

    min_e = error.copy()
    for i in range(h):
        for j in range(w):
            if gt[i, j] and ea[i, j] < error[i, j]:
                min_e[i, j] = ea[i, j]

    importance = np.ones((h, w))
    for i in range(h):
        for j in range(w):
            if not gt[i, j]:
                importance[i, j] = 2 - math.exp(math.log(0.5) / 5 * dist[i, j])

    ew = min_e * importance
    n_fg = len(fg)
    tpw = n_fg - sum(ew[i, j] for i, j in fg)
    fpw = sum(ew[i, j] for i in range(h) for j in range(w) if not gt[i, j])
    recall = 1 - sum(ew[i, j] for i, j in fg) / n_fg
    precision = tpw / (tpw + fpw + eps)
    return (1 + beta2) * recall * precision / (recall + beta2 * precision + eps)
