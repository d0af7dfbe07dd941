"""Compiled junction-forest engine for compensation sweeps.

Within one recovery round the structure of the compensated graph is fixed
and only the compensation tables change.  The forest is built once per
round from a min-fill elimination (one clique per variable, the clique of
``v`` being ``v`` plus its neighbours when eliminated), and messages are
kept lazily: a table change invalidates the messages flowing away from the
touched clique, and a query recomputes only the invalid messages flowing
towards it.  Relaxed constraints whose two ends share a component get an
extra interaction edge so that some clique holds both ends.

All tables are log-domain and flat; the kernels below mirror the reference
updates in :mod:`rcr.compensate` and are cross-checked against them in the
tests.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .exact import min_fill
from .model import LOG_ZERO, Compensation, FactorGraph

MODEL_SPLIT, PR_DD, MPE_DD = 0, 1, 2

# log-theta floor for model-split tables, so dividing a compensation back out stays finite
THETA_FLOOR = -700.0

_DEAD = LOG_ZERO / 2

ERR_DEGENERATE = 1


@njit(cache=True, _nrt=False)
def _sat(x):
    return x if x > LOG_ZERO else LOG_ZERO


@njit(cache=True, _nrt=False)
def _comb(vals, n, maxmode):
    m = LOG_ZERO
    for i in range(n):
        if vals[i] > m:
            m = vals[i]
    if maxmode or m <= _DEAD:
        return _sat(m)
    s = 0.0
    for i in range(n):
        s += math.exp(vals[i] - m)
    return _sat(m + math.log(s))


@njit(cache=True, _nrt=False)
def _reduce(vals, idx, n, out, nout, maxmode, acc):
    """out[idx[e]] = combine over e of vals[e]; ``acc`` is scratch of length >= nout."""
    for j in range(nout):
        out[j] = -np.inf
    for e in range(n):
        if vals[e] > out[idx[e]]:
            out[idx[e]] = vals[e]
    if not maxmode:
        for j in range(nout):
            acc[j] = 0.0
        for e in range(n):
            m = out[idx[e]]
            if m > _DEAD:
                acc[idx[e]] += math.exp(vals[e] - m)
        for j in range(nout):
            if out[j] > _DEAD:
                out[j] = out[j] + math.log(acc[j])
    for j in range(nout):
        if out[j] < LOG_ZERO:
            out[j] = LOG_ZERO


@njit(cache=True, _nrt=False)
def _gather(S, D, k, skip_child, with_down, vals):
    """vals[e] = pot_k[e] + incoming messages (all children but ``skip_child``)."""
    card = S[0]
    coff = S[1]
    csize = S[2]
    parent = S[3]
    ch_off = S[4]
    ch = S[5]
    pmap_off = S[6]
    pmap = S[7]
    sep_off = S[8]
    pot = D[0]
    msg_up = D[1]
    msg_dn = D[2]
    n = csize[k]
    base = coff[k]
    for e in range(n):
        vals[e] = pot[base + e]
    for q in range(ch_off[k], ch_off[k + 1]):
        d = ch[q]
        if d == skip_child:
            continue
        so = sep_off[d]
        po = pmap_off[d]
        for e in range(n):
            vals[e] += msg_up[so + pmap[po + e]]
    if with_down and parent[k] >= 0:
        rest = n // card[k]
        so = sep_off[k]
        for e in range(n):
            vals[e] += msg_dn[so + e % rest]


@njit(cache=True, _nrt=False)
def _compute(S, D, item, V, maxmode):
    card = S[0]
    csize = S[2]
    parent = S[3]
    pmap_off = S[6]
    pmap = S[7]
    sep_off = S[8]
    msg_up = D[1]
    msg_dn = D[2]
    val_up = D[3]
    val_dn = D[4]
    idx = D[7]
    vals = D[8]
    if item < V:
        d = item
        n = csize[d]
        rest = n // card[d]
        _gather(S, D, d, -1, False, vals)
        for e in range(n):
            idx[e] = e % rest
        _reduce(vals, idx, n, msg_up[sep_off[d]:], rest, maxmode, D[9])
        val_up[d] = True
    else:
        d = item - V
        p = parent[d]
        n = csize[p]
        _gather(S, D, p, d, True, vals)
        po = pmap_off[d]
        for e in range(n):
            idx[e] = pmap[po + e]
        _reduce(vals, idx, n, msg_dn[sep_off[d]:], csize[d] // card[d], maxmode, D[9])
        val_dn[d] = True


@njit(cache=True, _nrt=False)
def _ensure_incoming(S, D, k, maxmode, work):
    card = S[0]
    parent = S[3]
    ch_off = S[4]
    ch = S[5]
    val_up = D[3]
    val_dn = D[4]
    V = card.shape[0]
    n = 0
    for q in range(ch_off[k], ch_off[k + 1]):
        d = ch[q]
        if not val_up[d]:
            work[n] = d
            n += 1
    if parent[k] >= 0 and not val_dn[k]:
        work[n] = V + k
        n += 1
    i = 0
    while i < n:
        item = work[i]
        i += 1
        if item < V:
            for q in range(ch_off[item], ch_off[item + 1]):
                g = ch[q]
                if not val_up[g]:
                    work[n] = g
                    n += 1
        else:
            d = item - V
            p = parent[d]
            if parent[p] >= 0 and not val_dn[p]:
                work[n] = V + p
                n += 1
            for q in range(ch_off[p], ch_off[p + 1]):
                s = ch[q]
                if s != d and not val_up[s]:
                    work[n] = s
                    n += 1
    for j in range(n - 1, -1, -1):
        _compute(S, D, work[j], V, maxmode)


@njit(cache=True, _nrt=False)
def _invalidate_from(S, D, k, stack_node, stack_from):
    parent = S[3]
    ch_off = S[4]
    ch = S[5]
    val_up = D[3]
    val_dn = D[4]
    top = 0
    for q in range(ch_off[k], ch_off[k + 1]):
        d = ch[q]
        if val_dn[d]:
            val_dn[d] = False
            stack_node[top] = d
            stack_from[top] = -2
            top += 1
    if parent[k] >= 0 and val_up[k]:
        val_up[k] = False
        stack_node[top] = parent[k]
        stack_from[top] = k
        top += 1
    while top > 0:
        top -= 1
        u = stack_node[top]
        came = stack_from[top]
        if came != -2 and parent[u] >= 0 and val_up[u]:
            val_up[u] = False
            stack_node[top] = parent[u]
            stack_from[top] = u
            top += 1
        for q in range(ch_off[u], ch_off[u + 1]):
            g = ch[q]
            if g != came and val_dn[g]:
                val_dn[g] = False
                stack_node[top] = g
                stack_from[top] = -2
                top += 1


@njit(cache=True, _nrt=False)
def _set_pot(S, D, v):
    card = S[0]
    coff = S[1]
    csize = S[2]
    vc_off = S[12]
    vc_con = S[13]
    vc_side = S[14]
    pot_base = S[15]
    pot = D[0]
    theta_o = D[5]
    theta_i = D[6]
    n = csize[v]
    rest = n // card[v]
    base = coff[v]
    for e in range(n):
        pot[base + e] = pot_base[base + e]
    for q in range(vc_off[v], vc_off[v + 1]):
        c = vc_con[q]
        th = theta_o if vc_side[q] == 0 else theta_i
        for e in range(n):
            pot[base + e] += th[c, e // rest]


@njit(cache=True, _nrt=False)
def _belief_total(S, D, k, maxmode, work):
    csize = S[2]
    vals = D[8]
    _ensure_incoming(S, D, k, maxmode, work)
    _gather(S, D, k, -1, True, vals)
    return _comb(vals, csize[k], maxmode)


@njit(cache=True, _nrt=False)
def _var_marginal(S, D, v, maxmode, work, out):
    """out[s] = log marginal of v at state s, within v's component."""
    card = S[0]
    csize = S[2]
    idx = D[7]
    vals = D[8]
    _ensure_incoming(S, D, v, maxmode, work)
    _gather(S, D, v, -1, True, vals)
    n = csize[v]
    rest = n // card[v]
    for e in range(n):
        idx[e] = e // rest
    _reduce(vals, idx, n, out, card[v], maxmode, D[9])


@njit(cache=True, _nrt=False)
def _update(S, D, Q, c, scheme, maxmode, apply, work, snode, sfrom, comp_total, out, scratch):
    """Process one relaxed constraint.

    Writes ``out = (max |delta log theta|, impact, warned, error)`` where
    ``impact`` is the model value (same semiring) if ``c`` alone were
    recovered, computed before the update.  Returns the change in the
    total model value.
    """
    card = S[0]
    csize = S[2]
    theta_o = D[5]
    theta_i = D[6]
    idx = D[7]
    vals = D[8]
    cx = Q[0]
    ci = Q[1]
    qk = Q[2]
    sx = Q[3]
    si = Q[4]
    comp = Q[5]
    total = Q[6]
    x = cx[c]
    xi = ci[c]
    K = card[x]
    P = comp[x]
    Qc = comp[xi]
    out[0] = 0.0
    out[2] = 0.0
    out[3] = 0.0
    a = scratch[0]
    b = scratch[1]
    new_o = scratch[2]
    new_i = scratch[3]
    tmp = scratch[4]
    R = scratch[5]
    mx = scratch[6]
    mi = scratch[7]
    for s in range(K):
        new_o[s] = theta_o[c, s]
        new_i[s] = theta_i[c, s]
    bound = total[0]
    same = qk[c] >= 0
    if same:
        k = qk[c]
        _ensure_incoming(S, D, k, maxmode, work)
        _gather(S, D, k, -1, True, vals)
        n = csize[k]
        for e in range(n):
            idx[e] = ((e // sx[c]) % K) * K + (e // si[c]) % K
        _reduce(vals, idx, n, R, K * K, maxmode, D[9])
        zp = _comb(R, K * K, maxmode)
        for s in range(K):
            for t in range(K):
                if R[s * K + t] > _DEAD:
                    R[s * K + t] = R[s * K + t] - theta_o[c, s] - theta_i[c, t]
        for s in range(K):
            for t in range(K):
                tmp[t] = _sat(R[s * K + t] + theta_i[c, t])
            a[s] = _comb(tmp, K, maxmode)
        for t in range(K):
            for s in range(K):
                tmp[s] = _sat(R[s * K + t] + theta_o[c, s])
            b[t] = _comb(tmp, K, maxmode)
        for s in range(K):
            tmp[s] = R[s * K + s]
        out[1] = _comb(tmp, K, maxmode) + bound - zp
        zq = 0.0
    else:
        _var_marginal(S, D, x, maxmode, work, mx)
        _var_marginal(S, D, xi, maxmode, work, mi)
        zp = _comb(mx, K, maxmode)
        zq = _comb(mi, K, maxmode)
        for s in range(K):
            a[s] = mx[s] - theta_o[c, s] if mx[s] > _DEAD else LOG_ZERO
            b[s] = mi[s] - theta_i[c, s] if mi[s] > _DEAD else LOG_ZERO
            tmp[s] = _sat(a[s] + b[s])
        out[1] = _comb(tmp, K, maxmode) + bound - zp - zq
    if not apply:
        return 0.0

    if scheme == MODEL_SPLIT:
        za = _comb(a, K, False)
        zb = _comb(b, K, False)
        if za <= _DEAD or zb <= _DEAD:
            out[3] = 1.0
            return 0.0
        for s in range(K):
            new_o[s] = max(b[s] - zb, THETA_FLOOR)
            new_i[s] = max(a[s] - za, THETA_FLOOR)
    elif same and K != 2:
        out[3] = 2.0
        return 0.0
    elif same:
        # binary update with theta(not x) = theta(not x_i) = 1; x is state 0
        r10 = R[1 * K + 0]
        r01 = R[0 * K + 1]
        if r10 <= _DEAD or r01 <= _DEAD:
            out[2] = 1.0
        else:
            new_o[0] = 0.5 * (r10 - r01)
            new_o[1] = 0.0
            new_i[0] = -new_o[0]
            new_i[1] = 0.0
    else:
        for s in range(K):
            if a[s] <= _DEAD or b[s] <= _DEAD:
                out[2] = 1.0
                continue
            new_o[s] = 0.5 * ((b[s] + zp) - (a[s] + zq))
            new_i[s] = -new_o[s]

    delta = 0.0
    for s in range(K):
        delta = max(delta, abs(new_o[s] - theta_o[c, s]), abs(new_i[s] - theta_i[c, s]))
    out[0] = delta
    if delta == 0.0:
        return 0.0

    if same:
        for s in range(K):
            for t in range(K):
                tmp[s * K + t] = _sat(R[s * K + t] + new_o[s] + new_i[t]) if R[s * K + t] > _DEAD else LOG_ZERO
        nzp = _comb(tmp, K * K, maxmode)
        change = nzp - comp_total[P]
        comp_total[P] = nzp
    else:
        for s in range(K):
            tmp[s] = _sat(a[s] + new_o[s]) if a[s] > _DEAD else LOG_ZERO
        nzp = _comb(tmp, K, maxmode)
        for s in range(K):
            tmp[s] = _sat(b[s] + new_i[s]) if b[s] > _DEAD else LOG_ZERO
        nzq = _comb(tmp, K, maxmode)
        change = (nzp - comp_total[P]) + (nzq - comp_total[Qc])
        comp_total[P] = nzp
        comp_total[Qc] = nzq

    for s in range(K):
        theta_o[c, s] = new_o[s]
        theta_i[c, s] = new_i[s]
    _set_pot(S, D, x)
    _set_pot(S, D, xi)
    _invalidate_from(S, D, x, snode, sfrom)
    _invalidate_from(S, D, xi, snode, sfrom)
    total[0] = bound + change
    return change


@njit(cache=True, _nrt=False)
def _totals(S, D, roots, rcomp, maxmode, work, comp_total, const):
    t = const
    for j in range(roots.shape[0]):
        z = _belief_total(S, D, roots[j], maxmode, work)
        comp_total[rcomp[j]] = z
        t += z
    return t


@njit(cache=True)
def _sweeps(S, D, Q, active, scheme, maxmode, tol, max_iter, roots, rcomp, const,
            work, snode, sfrom, comp_total, traj, upd_traj, impacts, record):
    total = Q[6]
    total[0] = _totals(S, D, roots, rcomp, maxmode, work, comp_total, const)
    out = np.zeros(4)
    kmax = 1
    for v in range(S[0].shape[0]):
        kmax = max(kmax, S[0][v])
    scratch = np.empty((8, kmax * kmax))
    warnings = 0
    it = 0
    max_delta = 0.0
    converged = active.shape[0] == 0
    while not converged and it < max_iter:
        max_delta = 0.0
        for j in range(active.shape[0]):
            c = active[j]
            _update(S, D, Q, c, scheme, maxmode, True, work, snode, sfrom, comp_total, out, scratch)
            if out[3] != 0.0:
                return it, max_delta, False, warnings, c
            if out[2] != 0.0:
                warnings += 1
            impacts[c] = out[1]
            if out[0] > max_delta:
                max_delta = out[0]
            if record:
                upd_traj[it, j] = total[0]
        traj[it] = total[0]
        it += 1
        if max_delta <= tol:
            converged = True
    return it, max_delta, converged, warnings, -1


@njit(cache=True)
def _impact_pass(S, D, Q, active, maxmode, roots, rcomp, const, work, snode, sfrom,
                 comp_total, impacts):
    total = Q[6]
    total[0] = _totals(S, D, roots, rcomp, maxmode, work, comp_total, const)
    out = np.zeros(4)
    kmax = 1
    for v in range(S[0].shape[0]):
        kmax = max(kmax, S[0][v])
    scratch = np.empty((8, kmax * kmax))
    for j in range(active.shape[0]):
        c = active[j]
        _update(S, D, Q, c, 0, maxmode, False, work, snode, sfrom, comp_total, out, scratch)
        impacts[c] = out[1]


@njit(cache=True, _nrt=False)
def _decode(S, D, roots, work, assign):
    card = S[0]
    coff = S[1]
    csize = S[2]
    ch_off = S[4]
    ch = S[5]
    pmap_off = S[6]
    pmap = S[7]
    sep_off = S[8]
    cv_off = S[9]
    cv = S[10]
    order = S[11]
    pot = D[0]
    msg_up = D[1]
    for j in range(roots.shape[0]):
        _ensure_incoming(S, D, roots[j], True, work)
    for q in range(order.shape[0] - 1, -1, -1):
        v = order[q]
        n = csize[v]
        rest = n // card[v]
        # separator index of the already-decoded neighbours (row-major over cv[1:])
        j = 0
        stride = rest
        for r in range(cv_off[v] + 1, cv_off[v + 1]):
            u = cv[r]
            stride //= card[u]
            j += assign[u] * stride
        best = -np.inf
        arg = 0
        for s in range(card[v]):
            e = s * rest + j
            val = pot[coff[v] + e]
            for qq in range(ch_off[v], ch_off[v + 1]):
                d = ch[qq]
                val += msg_up[sep_off[d] + pmap[pmap_off[d] + e]]
            if val > best:
                best = val
                arg = s
        assign[v] = arg


class JunctionForest:
    """Exact inference on a compensated graph with mutable compensation tables.

    ``ends`` maps each active (relaxed) constraint id to the graph ids of
    its original and clone; ``theta_o``/``theta_i`` are the stacked log
    tables, indexed by constraint id (rows of inactive ids are ignored).
    """

    def __init__(self, graph: FactorGraph, ends: dict[int, tuple[int, int]],
                 theta_o: np.ndarray, theta_i: np.ndarray):
        V = graph.num_variables
        cards = np.array(graph.cards, dtype=np.int64)
        active = np.array(sorted(ends), dtype=np.int64)
        self.active = active
        self.num_variables = V
        m = theta_o.shape[0]

        base = [f for f in graph.factors
                if not (isinstance(f.kind, Compensation) and f.kind.constraint in ends)]

        # components over the base factors
        root = list(range(V))

        def find(u):
            while root[u] != u:
                root[u] = root[root[u]]
                u = root[u]
            return u

        adj = [set() for _ in range(V)]
        for f in base:
            for u in f.scope:
                adj[u].update(w for w in f.scope if w != u)
            for u in f.scope[1:]:
                ru, rv = find(u), find(f.scope[0])
                if ru != rv:
                    root[ru] = rv
        same = {c: find(x) == find(xi) for c, (x, xi) in ends.items()}
        for c, (x, xi) in ends.items():
            if same[c]:
                adj[x].add(xi)
                adj[xi].add(x)
        comp_of_root: dict[int, int] = {}
        comp = np.empty(V, dtype=np.int64)
        for v in range(V):
            comp[v] = comp_of_root.setdefault(find(v), len(comp_of_root))
        self.num_components = len(comp_of_root)

        order, cliques = min_fill(cards.tolist(), adj)
        pos = np.empty(V, dtype=np.int64)
        pos[np.array(order, dtype=np.int64)] = np.arange(V)
        clique_of = [None] * V
        for cl in cliques:
            clique_of[cl[0]] = cl
        parent = np.full(V, -1, dtype=np.int64)
        for v in range(V):
            nb = clique_of[v][1:]
            if nb:
                parent[v] = min(nb, key=lambda u: pos[u])
        csize = np.array([math.prod(int(cards[u]) for u in clique_of[v]) for v in range(V)],
                         dtype=np.int64)
        if csize.max(initial=1) > 2**26:
            raise MemoryError(f"junction forest clique of {csize.max()} entries is too large")
        coff = np.zeros(V, dtype=np.int64)
        coff[1:] = np.cumsum(csize)[:-1]
        sep_size = csize // cards
        sep_off = np.zeros(V, dtype=np.int64)
        sep_off[1:] = np.cumsum(sep_size)[:-1]

        children = [[] for _ in range(V)]
        for v in range(V):
            if parent[v] >= 0:
                children[parent[v]].append(v)
        ch_off = np.zeros(V + 1, dtype=np.int64)
        ch_off[1:] = np.cumsum([len(c) for c in children])
        ch = np.array([d for cs in children for d in cs], dtype=np.int64)

        cv_off = np.zeros(V + 1, dtype=np.int64)
        cv_off[1:] = np.cumsum([len(clique_of[v]) for v in range(V)])
        cv = np.array([u for v in range(V) for u in clique_of[v]], dtype=np.int64)

        states = {}

        def clique_states(v):
            if v not in states:
                shape = [int(cards[u]) for u in clique_of[v]]
                states[v] = np.indices(shape).reshape(len(shape), -1)
            return states[v]

        pmap_off = np.zeros(V, dtype=np.int64)
        pmaps = []
        off = 0
        for v in range(V):
            p = parent[v]
            if p < 0:
                continue
            sep = clique_of[v][1:]
            pvars = clique_of[p]
            st = clique_states(p)
            rows = [pvars.index(u) for u in sep]
            pmaps.append(np.ravel_multi_index(tuple(st[rows]), [int(cards[u]) for u in sep]))
            pmap_off[v] = off
            off += int(csize[p])
        pmap = np.concatenate(pmaps).astype(np.int64) if pmaps else np.zeros(1, dtype=np.int64)

        pot_base = np.zeros(int(csize.sum()))
        const = 0.0
        for f in base:
            if not f.scope:
                const += float(f.table)
                continue
            home = min(f.scope, key=lambda u: pos[u])
            st = clique_states(home)
            hv = clique_of[home]
            rows = [hv.index(u) for u in f.scope]
            seg = slice(coff[home], coff[home] + csize[home])
            pot_base[seg] += f.table[tuple(st[rows])]
        np.maximum(pot_base, LOG_ZERO, out=pot_base)
        self.const = max(const, LOG_ZERO)

        contrib = [[] for _ in range(V)]
        for c in active.tolist():
            x, xi = ends[c]
            contrib[x].append((c, 0))
            contrib[xi].append((c, 1))
        vc_off = np.zeros(V + 1, dtype=np.int64)
        vc_off[1:] = np.cumsum([len(cs) for cs in contrib])
        vc_con = np.array([c for cs in contrib for c, _ in cs], dtype=np.int64)
        vc_side = np.array([s for cs in contrib for _, s in cs], dtype=np.int64)

        cx = np.full(m, -1, dtype=np.int64)
        ci = np.full(m, -1, dtype=np.int64)
        qk = np.full(m, -1, dtype=np.int64)
        sx = np.ones(m, dtype=np.int64)
        si = np.ones(m, dtype=np.int64)
        for c, (x, xi) in ends.items():
            cx[c], ci[c] = x, xi
            if same[c]:
                k = x if pos[x] < pos[xi] else xi
                kv = clique_of[k]
                shape = [int(cards[u]) for u in kv]
                strides = [math.prod(shape[j + 1:]) for j in range(len(shape))]
                qk[c] = k
                sx[c] = strides[kv.index(x)]
                si[c] = strides[kv.index(xi)]
        self.same_component = same

        roots = np.array([v for v in range(V) if parent[v] < 0], dtype=np.int64)
        self._roots = roots
        self._rcomp = comp[roots]
        self.plan_order = order
        self.cliques = cliques

        self._S = (cards, coff, csize, parent, ch_off, ch, pmap_off, pmap, sep_off,
                   cv_off, cv, np.array(order, dtype=np.int64), vc_off, vc_con, vc_side, pot_base)
        maxc = int(csize.max(initial=1))
        self._D = (pot_base.copy(), np.zeros(int(sep_size.sum()) + 1), np.zeros(int(sep_size.sum()) + 1),
                   np.zeros(V, dtype=np.bool_), np.zeros(V, dtype=np.bool_),
                   np.ascontiguousarray(theta_o, dtype=float).copy(),
                   np.ascontiguousarray(theta_i, dtype=float).copy(),
                   np.zeros(maxc, dtype=np.int64), np.zeros(maxc),
                   np.zeros(max(maxc, int(cards.max(initial=1)) ** 2)))
        self._Q = (cx, ci, qk, sx, si, comp, np.zeros(1))
        self._work = np.zeros(2 * V + 1, dtype=np.int64)
        self._snode = np.zeros(2 * V + 1, dtype=np.int64)
        self._sfrom = np.zeros(2 * V + 1, dtype=np.int64)
        self._comp_total = np.zeros(self.num_components)
        self._mode: bool | None = None
        for v in range(V):
            _set_pot(self._S, self._D, v)

    @property
    def theta_o(self) -> np.ndarray:
        return self._D[5]

    @property
    def theta_i(self) -> np.ndarray:
        return self._D[6]

    def _use_mode(self, maxmode: bool):
        if self._mode is not maxmode:
            self._D[3][:] = False
            self._D[4][:] = False
            self._mode = maxmode

    def sweeps(self, scheme: int, tol: float, max_iter: int, record_updates: bool = False):
        maxmode = scheme == MPE_DD
        self._use_mode(maxmode)
        traj = np.zeros(max(max_iter, 0))
        n = len(self.active)
        upd = np.zeros((max_iter, n)) if record_updates else np.zeros((0, 0))
        impacts = np.full(self.theta_o.shape[0], np.nan)
        it, delta, conv, warns, err = _sweeps(
            self._S, self._D, self._Q, self.active, scheme, maxmode, tol, max_iter,
            self._roots, self._rcomp, self.const, self._work, self._snode, self._sfrom,
            self._comp_total, traj, upd, impacts, record_updates)
        return dict(iterations=int(it), max_delta=float(delta), converged=bool(conv),
                    warnings=int(warns), error_constraint=int(err),
                    trajectory=traj[:it].copy(),
                    update_trajectory=upd[:it].copy() if record_updates else None,
                    impacts=impacts)

    def impacts(self, maxmode: bool) -> np.ndarray:
        self._use_mode(maxmode)
        out = np.full(self.theta_o.shape[0], np.nan)
        _impact_pass(self._S, self._D, self._Q, self.active, maxmode, self._roots, self._rcomp,
                     self.const, self._work, self._snode, self._sfrom, self._comp_total, out)
        return out

    def value(self, maxmode: bool) -> float:
        self._use_mode(maxmode)
        return float(_totals(self._S, self._D, self._roots, self._rcomp, maxmode, self._work,
                             self._comp_total, self.const))

    def decode(self) -> np.ndarray:
        self._use_mode(True)
        a = np.zeros(self.num_variables, dtype=np.int64)
        _decode(self._S, self._D, self._roots, self._work, a)
        return a
