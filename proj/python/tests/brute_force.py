"""Standalone design-enumeration oracle for small problem files.

A design gives each controller an action for every realization of what it
knows at t: its own y_1..y_t and u_1..u_{t-1}, plus every other controller's
(y, u) up to t-n. The minimum expected cost over all such designs is returned.

    python3 brute_force.py problem.json
"""

import itertools
import json
import sys


def _info_keys(p, k, t):
    shared = max(0, t - p["n"])
    parts = [range(p["y_size"][k])] * t + [range(p["u_size"][k])] * (t - 1)
    for j in range(p["K"]):
        if j != k:
            parts += [range(p["y_size"][j])] * shared + [range(p["u_size"][j])] * shared
    return list(itertools.product(*parts))


def _key(p, k, t, ys, us):
    shared = max(0, t - p["n"])
    key = tuple(ys[k][:t]) + tuple(us[k][: t - 1])
    for j in range(p["K"]):
        if j != k:
            key += tuple(ys[j][:shared]) + tuple(us[j][:shared])
    return key


def expected_cost(p, policy):
    K, T, X = p["K"], p["T"], p["x_size"]
    total = 0.0

    def joint(us):
        a = 0
        for k in range(K):
            a = a * p["u_size"][k] + us[k]
        return a

    def stage(t, x, prob, ys, us):
        nonlocal total
        for y in itertools.product(*[range(p["y_size"][k]) for k in range(K)]):
            q = prob
            for k in range(K):
                q *= p["obs"][k][t - 1][x][y[k]]
            if q == 0:
                continue
            ys2 = [ys[k] + [y[k]] for k in range(K)]
            u = [policy[(k, t, _key(p, k, t, ys2, us))] for k in range(K)]
            us2 = [us[k] + [u[k]] for k in range(K)]
            a = joint(u)
            for x2 in range(X):
                r = q * p["trans"][t - 1][x][a][x2]
                if r == 0:
                    continue
                total += r * p["cost"][t - 1][x2][a]
                if t < T:
                    stage(t + 1, x2, r, ys2, us2)

    for x0 in range(X):
        if p["x0_dist"][x0] > 0:
            stage(1, x0, p["x0_dist"][x0], [[] for _ in range(K)], [[] for _ in range(K)])
    return total


def brute_force(p):
    slots = [
        (k, t, key)
        for k in range(p["K"])
        for t in range(1, p["T"] + 1)
        for key in _info_keys(p, k, t)
    ]
    best, count = None, 0
    for acts in itertools.product(*[range(p["u_size"][k]) for (k, _, _) in slots]):
        c = expected_cost(p, dict(zip(slots, acts)))
        count += 1
        if best is None or c < best:
            best = c
    return best, count


if __name__ == "__main__":
    with open(sys.argv[1]) as f:
        cost, count = brute_force(json.load(f))
    print(count, repr(cost))
