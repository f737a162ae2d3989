"""Independent reference implementations used to cross-check the library.

Everything here is written against plain Python floats, lists and dicts on
purpose: these oracles must not share code paths (or bugs) with the package.
"""

from __future__ import annotations

import itertools
import math


def brute_force_balance(n, signed_edges):
    """Exhaustively search sign assignments certifying structural balance.

    ``signed_edges`` is a list of (i, j, sign) with sign in {+1, -1}.
    Returns a tuple (group_plus, group_minus) of sorted node lists, or None.
    The first node of each connected component is pinned to +1, matching the
    deterministic convention of the detector under test.
    """
    adj = {i: [] for i in range(n)}
    for i, j, s in signed_edges:
        adj[i].append(j)
        adj[j].append(i)
    comps = []
    seen = set()
    for root in range(n):
        if root in seen:
            continue
        comp, stack = [], [root]
        seen.add(root)
        while stack:
            u = stack.pop()
            comp.append(u)
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        comps.append(sorted(comp))

    assignment = {}
    for comp in comps:
        comp_edges = [(i, j, s) for (i, j, s) in signed_edges
                      if i in comp and j in comp]
        free = comp[1:]
        found = None
        for bits in itertools.product((1, -1), repeat=len(free)):
            cand = {comp[0]: 1}
            cand.update(dict(zip(free, bits)))
            if all(cand[i] * cand[j] == s for (i, j, s) in comp_edges):
                found = cand
                break
        if found is None:
            return None
        assignment.update(found)
    plus = sorted(i for i in range(n) if assignment[i] == 1)
    minus = sorted(i for i in range(n) if assignment[i] == -1)
    return plus, minus


def scalar_consensus_run(n, edges, x0, sigma, theta, beta, delta, chi0,
                         dt, horizon):
    """Reference event-triggered consensus on a scalar-weighted signed graph.

    ``edges`` maps (i, j) with i < j to a signed scalar weight.  Returns
    (trajectory, chi_trajectory, events): trajectory[k][i] is agent i's state
    at time k*dt, chi_trajectory[k][i] its threshold variable, events[i] the
    list of firing times (every agent broadcasts at t = 0).

    The step structure mirrors the block engine contract: exact affine state
    update under held broadcasts, classical 4-stage threshold integration,
    boundary-only strict trigger checks, atomic rebroadcast.
    """
    neighbors = {i: [] for i in range(n)}
    for (i, j), a in edges.items():
        neighbors[i].append(j)
        neighbors[j].append(i)

    def weight(i, j):
        return edges[(i, j)] if (i, j) in edges else edges[(j, i)]

    mu = {i: max((abs(weight(i, j)) for j in neighbors[i]), default=0.0)
          for i in range(n)}

    x = list(map(float, x0))
    xhat = list(x)
    chi = [float(chi0)] * n
    steps = int(round(horizon / dt))
    traj = [list(x)]
    chi_traj = [list(chi)]
    events = [[0.0] for _ in range(n)]

    for k in range(steps):
        q = []
        disagreement = []
        for i in range(n):
            qi = 0.0
            si = 0.0
            for j in neighbors[i]:
                a = weight(i, j)
                sgn = 1.0 if a > 0 else -1.0
                p = xhat[i] - sgn * xhat[j]
                qi -= abs(a) * p
                si += abs(a) * p * p
            q.append(qi)
            disagreement.append(si)

        new_chi = []
        for i in range(n):
            e0 = xhat[i] - x[i]

            def rate(c, s):
                e = e0 - s * q[i]
                drive = sigma / 4.0 * disagreement[i] \
                    - mu[i] * len(neighbors[i]) * e * e
                return -beta * c + delta * drive

            c = chi[i]
            k1 = rate(c, 0.0)
            k2 = rate(c + dt / 2.0 * k1, dt / 2.0)
            k3 = rate(c + dt / 2.0 * k2, dt / 2.0)
            k4 = rate(c + dt * k3, dt)
            new_chi.append(c + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
        chi = new_chi

        x = [x[i] + dt * q[i] for i in range(n)]
        t = (k + 1) * dt

        fired = []
        for i in range(n):
            e = xhat[i] - x[i]
            lhs = theta * (mu[i] * len(neighbors[i]) * e * e
                           - sigma / 4.0 * disagreement[i])
            if lhs > chi[i]:
                fired.append(i)
        for i in fired:
            xhat[i] = x[i]
            events[i].append(t)

        traj.append(list(x))
        chi_traj.append(list(chi))

    return traj, chi_traj, events


def quadratic_roots(b, c):
    """Real roots of x^2 + b x + c, ascending (used for 2x2 eigenvalues)."""
    disc = math.sqrt(b * b - 4.0 * c)
    return sorted(((-b - disc) / 2.0, (-b + disc) / 2.0))
