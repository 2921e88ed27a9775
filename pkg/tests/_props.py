"""Property checks shared by the unit suite and the acceptance run."""

import dataclasses
import random

from specforge import term as T
from specforge.kernel import KernelState
from specforge.speclang import check_spec, encode_spec, eval_spec, parse_spec
from specforge.symbolic import SymState
from specforge.symex import compiled_behavior, encode_behavior
from specforge.verifier import build_query, emit_smtlib, run_solver, sample_points
from specforge.verifier.smt import model_args, model_cells


def spec_checker(spec_text, behavior):
    """``agree(cells, args)``: the symbolic encoding evaluates like the direct evaluator."""
    fn = parse_spec(spec_text)
    cfg = behavior.config
    pre = SymState.fresh(cfg)
    names = [p for p, _ in behavior.params]
    enc = encode_spec(fn, pre, {p: T.var(f"arg!{p}", cfg.word_width) for p in names})
    f = T.compile_terms([enc.guard, *enc.cells])
    cell_names = [t.val for t in pre.cells]

    def agree(cells, args):
        env = dict(zip(cell_names, cells))
        env.update({f"arg!{p}": v for p, v in zip(names, args)})
        got = f(env)
        ok, post = eval_spec(fn, KernelState(cfg, tuple(cells)), args, strict=False)
        return bool(got[0]) == ok and list(got[1:]) == list(post.cells)

    return agree


def success_model(spec_text, behavior):
    """A solver model where the implementation takes its success path."""
    q = build_query(behavior, check_spec(parse_spec(spec_text), behavior.config))
    pre = SymState(behavior.config, q.cell_vars)
    ok = encode_behavior(behavior, pre, dict(zip(behavior.arg_names, q.arg_vars))).ok
    res = run_solver(emit_smtlib(dataclasses.replace(q, mismatch=ok)))
    assert res.status == "sat", f"{behavior.name} has no reachable success path"
    return list(model_cells(res.model, behavior.config)), list(model_args(res.model, behavior.arg_names,
                                                                          behavior.config))


def anchored_points(anchor, behavior, n, seed):
    """``n`` copies of ``anchor`` with one to three positions re-drawn.

    Uniform samples almost never satisfy the longer success guards; points
    near a success model land on both sides of every conjunct.
    """
    rng = random.Random(seed)
    cells0, args0 = anchor
    mask = behavior.config.mask
    out = []
    for _ in range(n):
        flat = cells0 + args0
        for _ in range(rng.randint(1, 3)):
            i = rng.randrange(len(flat))
            flat[i] = rng.choice((rng.randrange(5), rng.randrange(mask + 1), (flat[i] + rng.choice((-1, 1))) & mask))
        out.append((flat[:len(cells0)], flat[len(cells0):]))
    return out


def spec_agreement(spec_text, behavior, n, seed=7, anchor=None):
    """Disagreeing points among ``n`` random samples plus ``n`` points near ``anchor``."""
    agree = spec_checker(spec_text, behavior)
    cells, args = sample_points(behavior, n, seed)
    pts = list(zip(cells, args))
    if anchor is not None:
        pts += anchored_points(anchor, behavior, n, seed)
    return [(c, a) for c, a in pts if not agree(c, a)]


def path_partition(behavior, n, seed=11, anchor=None):
    """Samples where the number of satisfied path guards is not exactly one."""
    cb = compiled_behavior(behavior)
    cells, args = sample_points(behavior, n, seed)
    pts = list(zip(cells, args))
    if anchor is not None:
        pts += anchored_points(anchor, behavior, n, seed)
    return [(c, a) for c, a in pts if len(cb.true_paths(c, a)) != 1]
