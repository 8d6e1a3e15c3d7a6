"""Time the propagation kernel: compiled extension vs pure-Python fallback.

    python3 benchmarks/bench_kernel.py [--repeat N]

Runs 1-minimality from scratch on indicator instances of corpus languages
and on ternary condition instances, with both backends on identical arrays.
"""

import argparse
import random
import timeit
from array import array

from consdich import kernels
from consdich.csp import packed
from consdich.malcon import build_condition_instance, build_indicator, builtin_condition
from consdich.oracle import LanguageGenSpec, random_language


def workloads():
    rng = random.Random(0)
    out = []
    for seed in range(40):
        d = rng.choice([2, 3, 4])
        lang = random_language(LanguageGenSpec(seed, d, rng.randint(1, 4), 3, rng.randint(2, min(8, d * d - 1))))
        out.append(("indicator-2", build_indicator(lang, 2)))
        out.append(("indicator-3", build_indicator(lang, 3)))
        out.append(("majority", build_condition_instance(lang, builtin_condition("majority"), True)))
    return out


def run_all(prop, packs):
    ok = 0
    for pk in packs:
        dom, alive = pk.fresh()
        ok += bool(prop(*pk.arrays, dom, alive, array("i")))
    return ok


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    insts = workloads()
    packs = [packed(inst) for _, inst in insts]
    n_cons = sum(len(inst.constraints) for _, inst in insts)
    print(f"{len(insts)} instances, {n_cons} constraints in total")
    backends = ["python"]
    try:
        kernels.get_backend("cython")
        backends.append("cython")
    except ImportError:
        print("compiled extension not built; timing the fallback only")
    results = {}
    for name in backends:
        prop = kernels.get_backend(name)
        results[name] = run_all(prop, packs)
        best = min(timeit.repeat(lambda: run_all(prop, packs), number=1, repeat=args.repeat))
        print(f"{name:>7}: {best * 1000:9.2f} ms per sweep")
        results[name + "_time"] = best
    if "cython" in backends:
        assert results["python"] == results["cython"], "backends disagree"
        print(f"speedup: {results['python_time'] / results['cython_time']:.1f}x")


if __name__ == "__main__":
    main()
