"""Naive reference implementations used as independent oracles.

Everything here is deliberately written as plain loops over Python lists so
that it shares no code path with the production implementations it checks.
"""

import math


# ---------------------------------------------------------------- structure

def ref_noise_ratio(labels):
    return sum(1 for l in labels if l == -1) / len(labels)


def ref_transition_rate(labels, exclude_outlier_pairs=False):
    pairs = 0
    changes = 0
    for i in range(len(labels) - 1):
        if exclude_outlier_pairs and (labels[i] == -1 or labels[i + 1] == -1):
            continue
        pairs += 1
        if labels[i] != labels[i + 1]:
            changes += 1
    return changes / pairs if pairs else 0.0


def _topic_sizes(labels):
    sizes = {}
    for l in labels:
        if l != -1:
            sizes[l] = sizes.get(l, 0) + 1
    return sorted(sizes.values())


def ref_entropy_norm(labels):
    sizes = _topic_sizes(labels)
    if len(sizes) <= 1:
        return 0.0
    total = sum(sizes)
    h = -sum((s / total) * math.log(s / total) for s in sizes)
    return h / math.log(len(sizes))


def ref_gini(labels):
    sizes = _topic_sizes(labels)
    if not sizes:
        return 0.0
    n = len(sizes)
    mean = sum(sizes) / n
    diff = sum(abs(a - b) for a in sizes for b in sizes)
    return diff / (2 * n * n * mean)


# ------------------------------------------------------------ cluster validity

def _euclid(p, q):
    return math.sqrt(sum((a - b) ** 2 for a, b in zip(p, q)))


def _groups(points, labels):
    groups = {}
    for p, l in zip(points, labels):
        if l != -1:
            groups.setdefault(l, []).append(list(p))
    return groups


def _centroid(members):
    d = len(members[0])
    return [sum(m[i] for m in members) / len(members) for i in range(d)]


def ref_calinski_harabasz(points, labels):
    groups = _groups(points, labels)
    members = [p for ps in groups.values() for p in ps]
    n, t = len(members), len(groups)
    if t < 2 or n - t == 0:
        return None
    overall = _centroid(members)
    trace_b = sum(
        len(ps) * sum((c - o) ** 2 for c, o in zip(_centroid(ps), overall))
        for ps in groups.values()
    )
    trace_w = sum(
        sum((x - c) ** 2 for x, c in zip(p, _centroid(ps)))
        for ps in groups.values()
        for p in ps
    )
    if trace_w == 0:
        return None
    return (trace_b / (t - 1)) / (trace_w / (n - t))


def ref_silhouette(points, labels):
    groups = _groups(points, labels)
    if len(groups) < 2:
        return None
    values = []
    for p, l in zip(points, labels):
        if l == -1:
            continue
        own = groups[l]
        if len(own) == 1:
            values.append(0.0)
            continue
        # the self-distance term contributes 0, so dividing by len-1 excludes it
        a = sum(_euclid(p, q) for q in own) / (len(own) - 1)
        b = min(
            sum(_euclid(p, q) for q in ps) / len(ps)
            for c, ps in groups.items()
            if c != l
        )
        m = max(a, b)
        values.append((b - a) / m if m > 0 else 0.0)
    return sum(values) / len(values)


def ref_davies_bouldin(points, labels):
    groups = _groups(points, labels)
    if len(groups) < 2:
        return None
    ids = sorted(groups)
    centroids = {c: _centroid(groups[c]) for c in ids}
    scatter = {
        c: sum(_euclid(p, centroids[c]) for p in groups[c]) / len(groups[c]) for c in ids
    }
    worst = []
    for i in ids:
        ratios = []
        for j in ids:
            if i == j:
                continue
            d = _euclid(centroids[i], centroids[j])
            if d == 0:
                return None
            ratios.append((scatter[i] + scatter[j]) / d)
        worst.append(max(ratios))
    return sum(worst) / len(worst)


# ------------------------------------------------------------------ semantic

def ref_npmi(topics_words, documents, eps):
    doc_sets = [set(doc.lower().split()) for doc in documents]
    n = len(doc_sets)
    topic_means = []
    for words in topics_words:
        scores = []
        for i in range(len(words)):
            for j in range(i + 1, len(words)):
                wi, wj = words[i].lower(), words[j].lower()
                pi = sum(1 for s in doc_sets if wi in s) / n
                pj = sum(1 for s in doc_sets if wj in s) / n
                if pi == 0 or pj == 0:
                    continue
                pij = sum(1 for s in doc_sets if wi in s and wj in s) / n
                scores.append(
                    (math.log(pij + eps) - math.log(pi) - math.log(pj))
                    / (-math.log(pij + eps))
                )
        if scores:
            topic_means.append(sum(scores) / len(scores))
    if not topic_means:
        return None
    return sum(topic_means) / len(topic_means)


def ref_diversity(topics_words, top_k):
    unique = set()
    for words in topics_words:
        for w in words:
            unique.add(w)
    return len(unique) / (len(topics_words) * top_k)


def _cos(u, v):
    nu = math.sqrt(sum(x * x for x in u))
    nv = math.sqrt(sum(x * x for x in v))
    if nu == 0 or nv == 0:
        return 0.0
    return sum(a * b for a, b in zip(u, v)) / (nu * nv)


def ref_we_alignment(topics_words, table):
    topic_means = []
    for words in topics_words:
        vecs = [list(table[w]) for w in words if w in table]
        if len(vecs) < 2:
            continue
        sims = [
            _cos(vecs[i], vecs[j])
            for i in range(len(vecs))
            for j in range(i + 1, len(vecs))
        ]
        topic_means.append(sum(sims) / len(sims))
    if not topic_means:
        return None
    return sum(topic_means) / len(topic_means)


def ref_iec(points, labels):
    groups = _groups(points, labels)
    topic_means = []
    for c in sorted(groups):
        members = groups[c]
        if len(members) < 2:
            continue
        sims = [
            _cos(members[i], members[j])
            for i in range(len(members))
            for j in range(i + 1, len(members))
        ]
        topic_means.append(sum(sims) / len(sims))
    if not topic_means:
        return None
    return sum(topic_means) / len(topic_means)


# --------------------------------------------------- greedy frame selection

def ref_greedy_selection(relevance, sims, k, nu, dedup):
    """Step-by-step replay of the diversity-penalized greedy rule."""
    selected = []
    while len(selected) < k:
        best = None
        best_score = None
        for j in range(len(relevance)):
            if j in selected:
                continue
            if selected:
                mx = max(sims[j][i] for i in selected)
                if mx > dedup:
                    continue
                score = (1 - nu) * relevance[j] - nu * mx
            else:
                score = relevance[j]
            if best_score is None or score > best_score:
                best, best_score = j, score
        if best is None:
            break
        selected.append(best)
    return selected


# ------------------------------------------------------- class term weights

def ref_class_term_weights(class_counts):
    """Spreadsheet-style recomputation of the class-based TF-IDF weights."""
    classes = sorted(class_counts)
    total = sum(sum(class_counts[c].values()) for c in classes)
    mean_tokens = total / len(classes)
    corpus_freq = {}
    for c in classes:
        for t, n in class_counts[c].items():
            corpus_freq[t] = corpus_freq.get(t, 0) + n
    return {
        c: {
            t: n * math.log(1 + mean_tokens / corpus_freq[t])
            for t, n in class_counts[c].items()
        }
        for c in classes
    }
