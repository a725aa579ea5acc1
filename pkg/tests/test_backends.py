"""Compiled-vs-pure-Python kernel equivalence.

The two kernels implement the same arithmetic in the same order, so on the
platforms this package targets their outputs agree exactly; the assertions
below allow a few ulps of slack in case a compiler reassociates."""

import random
from dataclasses import replace

import numpy as np
import pytest

from etcdelay.backend import available_backends, get_kernel
from etcdelay.expr import parse_expr
from etcdelay.halanay import HalanayParams, integrate_comparison
from etcdelay.scenarios import BUILTINS, EXAMPLE2_FIG2
from etcdelay.sim import simulate

needs_compiled = pytest.mark.skipif(
    "compiled" not in available_backends(),
    reason="compiled kernel not built",
)


def run_scenario(sc, backend_name, **overrides):
    system, sp, cfg, sim_cfg, mode, controller = sc.build()
    if overrides:
        sim_cfg = replace(sim_cfg, **overrides)
    cfg = cfg.bound_to(controller, system.matrices.B)
    return simulate(system, controller, cfg, sim_cfg, backend_name=backend_name)


class TestProgramEvaluation:
    def test_kernel_matches_tree_walk(self, backend_name):
        kern = get_kernel(backend_name)
        rng = random.Random(99)
        exprs = ["2 - sin(t^2)", "-0.15*cos(3*pi*t/2)", "exp(-t)*t + 1/(t + 10)",
                 "abs(t - 1)^3.0 - ln(t + 5)", "t/2 - t*t + e"]
        for src in exprs:
            e = parse_expr(src, "t")
            for _ in range(50):
                x = rng.uniform(-3.0, 3.0)
                got = kern.eval_program(e.ops, e.args, e.consts, x)
                assert got == e(x)

    def test_domain_errors_become_nan(self, backend_name):
        kern = get_kernel(backend_name)
        for src, x in [("ln(t)", -1.0), ("1/t", 0.0)]:
            e = parse_expr(src, "t")
            assert np.isnan(kern.eval_program(e.ops, e.args, e.consts, x))


@needs_compiled
class TestKernelParity:
    @pytest.mark.parametrize("name", sorted(BUILTINS))
    def test_closed_loop_trajectories_agree(self, name):
        sc = BUILTINS[name]
        rc = run_scenario(sc, "compiled", horizon=min(sc.horizon, 10.0))
        rp = run_scenario(sc, "python", horizon=min(sc.horizon, 10.0))
        assert len(rc.events) == len(rp.events)
        assert np.allclose(rc.events, rp.events, rtol=0.0, atol=1e-9)
        assert rc.times.shape == rp.times.shape
        assert np.allclose(rc.states, rp.states, rtol=1e-12, atol=1e-15)

    def test_hermite_mode_agrees(self):
        rc = run_scenario(EXAMPLE2_FIG2, "compiled", horizon=5.0, interp="cubic-hermite")
        rp = run_scenario(EXAMPLE2_FIG2, "python", horizon=5.0, interp="cubic-hermite")
        assert len(rc.events) == len(rp.events)
        assert np.allclose(rc.states, rp.states, rtol=1e-12, atol=1e-15)

    def test_comparison_integrator_agrees(self):
        p = HalanayParams(a=1.3, b=0.5, alpha=0.2, beta=0.9, r=1.7)
        tc, vc = integrate_comparison(p, v0=2.0, backend_name="compiled")
        tp, vp = integrate_comparison(p, v0=2.0, backend_name="python")
        assert np.array_equal(tc, tp)
        assert np.allclose(vc, vp, rtol=1e-13, atol=0.0)

    def test_zeno_guard_agrees(self):
        rc = run_scenario(EXAMPLE2_FIG2, "compiled", max_events=3)
        rp = run_scenario(EXAMPLE2_FIG2, "python", max_events=3)
        assert rc.zeno_guard_hit and rp.zeno_guard_hit
        assert len(rc.events) == len(rp.events)
