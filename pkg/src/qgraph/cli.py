"""Command-line front end.

Subcommands: spectrum, trace, albanese, blocks, planar, dual, bloch,
isospec.  Reports are line-oriented key-value text; identical inputs and
seed produce byte-identical output.  Exit codes: 1 input error, 2 numeric
error, 3 inconclusive search.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

from .errors import InconclusiveError, InputError, NumericError
from . import fileio
from .graphs import (
    block_decomposition,
    geometric_dual,
    nonpositive_basis_search,
    spanning_tree_cycle_basis,
)
from .metric import MetricGraph, albanese_gram, generic_one_form
from .orbits import length_spectrum, trace_check
from .spectral import eigenvalues, weyl_check
from . import blochinv
from . import isospec as iso


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return fileio.format_length(x)
    return f"{float(x):.12g}"


def _cmd_spectrum(args, out):
    g, form = fileio.parse_graph_file(args.graph)
    slice_ = eigenvalues(g, form, args.kmax)
    for k, m in slice_.entries:
        out(f"k {_fmt(k)} {m}")
    rep = weyl_check(slice_, float(g.total_length))
    out(f"weyl_max_deviation {_fmt(rep.max_deviation)}")
    return 0


def _cmd_trace(args, out):
    g, form = fileio.parse_graph_file(args.graph)
    ls = length_spectrum(g, form, Fraction(args.lmax).limit_denominator(10**6))
    for e in ls.entries:
        out(
            f"aggregate_at_t0 {_fmt(e.length)} {_fmt(e.aggregate_at_zero())}"
            f" terms {len(e.terms)}"
        )
    if args.kmax > 0:
        slice_ = eigenvalues(g, form, args.kmax)
        rep = trace_check(g, form, slice_, args.sigma, args.lmax)
        for r in rep.records:
            out(
                f"orbitlen {_fmt(r.length)} spectral {_fmt(r.spectral)}"
                f" geometric {_fmt(r.geometric)} relerr {_fmt(r.relative_error)}"
            )
        out(f"fitted_constant {_fmt(rep.fitted_constant)}")
        out(f"chi_V_minus_E {rep.chi_v_minus_e}")
        out(f"chi_V_minus_E_minus_1 {rep.chi_v_minus_e_minus_1}")
        out(f"matching_convention {rep.matching_convention}")
    return 0


def _cmd_albanese(args, out):
    g, _ = fileio.parse_graph_file(args.graph)
    basis = spanning_tree_cycle_basis(g.graph)
    gram = albanese_gram(g, basis)
    out(f"rank {len(basis)}")
    for row in gram:
        out("gram " + " ".join(_fmt(x) for x in row))
    return 0


def _cmd_blocks(args, out):
    g, _ = fileio.parse_graph_file(args.graph)
    bt = block_decomposition(g.graph)
    for i, blk in enumerate(bt.blocks):
        out(f"block {i} edges " + " ".join(str(e) for e in sorted(blk)))
    out("bridges " + " ".join(str(e) for e in bt.bridges))
    out("cut_vertices " + " ".join(str(v) for v in bt.cut_vertices))
    return 0


def _cmd_planar(args, out):
    g, _ = fileio.parse_graph_file(args.graph)
    basis = nonpositive_basis_search(g.graph)
    if basis is None:
        out("planar no")
    else:
        out("planar yes")
        for c in basis:
            out("cycle " + " ".join(str(b) for b in c.bonds))
    return 0


def _cmd_dual(args, out):
    g, _ = fileio.parse_graph_file(args.graph)
    basis = nonpositive_basis_search(g.graph)
    if basis is None:
        raise InputError("graph is not planar; no dual exists")
    dual, edge_map = geometric_dual(g.graph, basis)
    out(f"dual_vertices {dual.vertex_count}")
    for eid, (a, b) in enumerate(dual.edges):
        out(f"dual_edge {eid} {a} {b} primal {edge_map[eid]}")
    return 0


def _cmd_bloch(args, out):
    g, _ = fileio.parse_graph_file(args.graph)
    if args.source == "exact":
        source = blochinv.ExactBlochSource(g, seed=args.seed)
    else:
        source = blochinv.NumericBlochSource.from_graph(
            g, seed=args.seed, n_t=args.tgrid, k_max=args.kmax, sigma_w=args.sigma
        )
    table, oracle = blochinv.recover_homology_lengths(source)
    out(f"rank {table.rank}")
    for row in table.rows:
        out(
            f"frequency {_fmt(row.frequency)} length {_fmt(row.length)}"
            f" amplitude {_fmt(row.amplitude)} coords "
            + ",".join(str(c) for c in row.coords)
        )
    if args.stage == "frequencies":
        return 0
    basis = blochinv.cycle_generator_basis(oracle)
    gram = blochinv.recover_albanese(oracle, basis)
    for row in gram:
        out("albanese " + " ".join(_fmt(x) for x in row))
    out(f"gram_det {_fmt(blochinv.gram_determinant(gram))}")
    if args.stage == "albanese":
        return 0
    bt = blochinv.recover_blocks(oracle)
    out("block_ranks " + " ".join(str(r) for r in bt.block_ranks))
    for a, b, l in bt.layout_edges:
        out(f"block_tree {a[0]}:{a[1]} {b[0]}:{b[1]} {_fmt(l)}")
    if args.stage == "blocks":
        return 0
    fb = blochinv.recover_planarity(oracle)
    out(f"planar {'yes' if fb is not None else 'no'}")
    if args.stage == "planarity" or fb is None:
        return 0
    rd = blochinv.recover_dual(oracle)
    out(f"dual_vertices {rd.graph.vertex_count}")
    for a, b in rd.graph.edges:
        out(f"dual_edge {a} {b}")
    if args.stage == "dual":
        return 0
    rec = blochinv.recover_quantum_graph(oracle)
    out(f"recovered_vertices {rec.graph.vertex_count}")
    for eid, ((a, b), l) in enumerate(zip(rec.graph.edges, rec.lengths)):
        out(f"recovered_edge {eid} {a} {b} {_fmt(l)}")
    from .graphs import is_isomorphic

    ok = is_isomorphic(g.graph, rec.graph, g.lengths, rec.lengths)
    out(f"isomorphic_to_input {'yes' if ok else 'no'}")
    if args.emit_graph:
        fileio.write_graph_file(args.emit_graph, rec)
        out(f"emitted {args.emit_graph}")
    return 0


def _parse_seidel_file(path):
    g1_edges, g2_edges, pattern = [], [], []
    n1 = n2 = None
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            toks = line.split()
            if toks[0] == "vertices1":
                n1 = int(toks[1])
            elif toks[0] == "vertices2":
                n2 = int(toks[1])
            elif toks[0] == "edge1":
                g1_edges.append((int(toks[1]), int(toks[2])))
            elif toks[0] == "edge2":
                g2_edges.append((int(toks[1]), int(toks[2])))
            elif toks[0] == "pattern":
                pattern.append(tuple(int(x) for x in toks[1:]))
            else:
                raise InputError(f"unknown directive '{toks[0]}', line {line_no}")
    if n1 is None or n2 is None:
        raise InputError("seidel file needs vertices1 and vertices2")
    from .graphs import CombinatorialGraph

    return iso.SwitchingScheme(
        CombinatorialGraph(n1, tuple(g1_edges)),
        CombinatorialGraph(n2, tuple(g2_edges)),
        tuple(pattern),
    )


def _cmd_isospec(args, out):
    if args.bound:
        total, chi = Fraction(args.bound[0]), int(args.bound[1])
        M = iso.edge_count_bound(total, chi)
        ceil_val, exact, loose = iso.family_size_bound(total, chi)
        out(f"edge_bound_M {M}")
        out(f"family_bound {ceil_val}")
        out(f"family_bound_exact {exact.numerator}/{exact.denominator}")
        out(f"family_bound_e7LlnL {_fmt(loose)}")
        return 0
    if args.seidel:
        scheme = _parse_seidel_file(args.seidel)
        G, Gt = iso.seidel_switch(scheme)
        from .spectral import combinatorial_spectrum, graph_isospectral

        out(f"graph_isospectral {'yes' if graph_isospectral(G, Gt) else 'no'}")
        s = combinatorial_spectrum(G)
        out("spectrum " + " ".join(_fmt(x) for x in s))
        return 0
    if args.search is not None:
        fams = iso.quantum_isospectral_search(
            Fraction(args.search), k_max=args.kmax
        )
        for i, fam in enumerate(fams):
            out(f"family {i} size {len(fam.members)}")
            for m in fam.members:
                desc = ";".join(
                    f"{a}-{b}:{fileio.format_length(l)}"
                    for (a, b), l in zip(m.graph.edges, m.lengths)
                )
                out(f"  member {desc}")
        return 0
    raise InputError("isospec needs one of --search, --seidel, --bound")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="qgraph",
        description="Spectra, trace formulas and inverse Bloch recovery "
        "for metric graphs",
    )
    p.add_argument("--seed", type=int, default=0, help="seed for generic forms")
    p.add_argument("--output", help="write the report to this path")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="eigenvalue slice of a quantum graph")
    sp.add_argument("graph")
    sp.add_argument("--kmax", type=float, default=20.0)

    tr = sub.add_parser("trace", help="trace-formula verification")
    tr.add_argument("graph")
    tr.add_argument("--lmax", "--Lmax", dest="lmax", type=float, default=5.0)
    tr.add_argument("--sigma", type=float, default=0.02)
    tr.add_argument("--kmax", type=float, default=400.0)

    al = sub.add_parser("albanese", help="Albanese Gram matrix (forward)")
    al.add_argument("graph")

    bl = sub.add_parser("blocks", help="block decomposition (forward)")
    bl.add_argument("graph")

    pl = sub.add_parser("planar", help="MacLane planarity (forward)")
    pl.add_argument("graph")

    du = sub.add_parser("dual", help="geometric dual (forward)")
    du.add_argument("graph")

    bc = sub.add_parser("bloch", help="inverse pipeline from Bloch data")
    bc.add_argument("graph")
    bc.add_argument("--source", choices=("exact", "numeric"), default="exact")
    bc.add_argument(
        "--stage",
        choices=("frequencies", "albanese", "blocks", "planarity", "dual", "full"),
        default="full",
    )
    bc.add_argument("--emit-graph", dest="emit_graph")
    bc.add_argument("--kmax", type=float, default=350.0)
    bc.add_argument("--sigma", type=float, default=0.02)
    bc.add_argument("--tgrid", type=int, default=64)

    isp = sub.add_parser("isospec", help="isospectrality tools")
    isp.add_argument("--search", help="enumerate families up to this total length")
    isp.add_argument("--seidel", help="switching scheme file")
    isp.add_argument("--bound", nargs=2, metavar=("L", "CHI"))
    isp.add_argument("--kmax", type=float, default=20.0)

    return p


_COMMANDS = {
    "spectrum": _cmd_spectrum,
    "trace": _cmd_trace,
    "albanese": _cmd_albanese,
    "blocks": _cmd_blocks,
    "planar": _cmd_planar,
    "dual": _cmd_dual,
    "bloch": _cmd_bloch,
    "isospec": _cmd_isospec,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    os.environ.setdefault("QGRAPH_THREADS", "1")
    lines: list[str] = []

    def out(s: str) -> None:
        lines.append(s)

    try:
        status = _COMMANDS[args.command](args, out)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 2
    except InconclusiveError as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return 3
    text = "\n".join(lines) + ("\n" if lines else "")
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
