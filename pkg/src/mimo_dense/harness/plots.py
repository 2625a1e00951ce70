"""Figure rendering for the experiment artifacts.

Each experiment gets one PNG next to its CSV, drawn from the aggregate
rows.  The CSV remains the primary artifact; figures are a convenience
view and carry no extra data.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .config import ExperimentConfig


def _rows_of_kind(rows: list[dict[str, str]], kind: str) -> list[dict[str, str]]:
    return [r for r in rows if r.get("row_kind") == kind]


def _plot_beam_pattern(config: ExperimentConfig, rows, ax_grid):
    fig, axes = plt.subplots(
        1, len(config.delta_t_list), subplot_kw={"projection": "polar"},
        figsize=(6 * len(config.delta_t_list), 5),
    )
    if len(config.delta_t_list) == 1:
        axes = [axes]
    for ax, delta in zip(axes, config.delta_t_list):
        sub = [r for r in rows if r["delta_t"] == str(delta)]
        ks = sorted({int(r["k"]) for r in sub})
        shown = ks if len(ks) <= 8 else ks[:: max(1, len(ks) // 8)][:8]
        for k in shown:
            pts = [r for r in sub if int(r["k"]) == k]
            ax.plot(
                [float(r["phi_rad"]) for r in pts],
                [float(r["magnitude"]) for r in pts],
                linewidth=0.9,
                label=f"k={k}",
            )
        ax.set_title(f"separation {delta}")
        ax.legend(loc="lower right", fontsize=7)
    fig.suptitle(f"Beam patterns, L={config.l_t}")
    return fig


def _plot_fig2(config: ExperimentConfig, rows, _):
    fig, ax = plt.subplots(figsize=(7, 5))
    for delta in config.delta_t_list:
        sub = [r for r in _rows_of_kind(rows, "mean") if r["delta_t"] == str(delta)]
        sub.sort(key=lambda r: float(r["gamma_tilde_db"]))
        db = [float(r["gamma_tilde_db"]) for r in sub]
        ax.plot(db, [float(r["capacity_normalized"]) for r in sub], "o-",
                label=f"full, $\\delta_t$={delta}")
        ax.plot(db, [float(r["capacity_trunc_normalized"]) for r in sub], "s--",
                label=f"truncated, $\\delta_t$={delta}")
    ax.set_xlabel("normalized SNR (dB)")
    ax.set_ylabel("capacity per spatial degree of freedom (nats)")
    ax.set_title(f"Full-CSI capacity, L_t={config.l_t}, L_r={config.l_r}")
    ax.grid(True, alpha=0.4)
    ax.legend()
    return fig


def _plot_fig3(config: ExperimentConfig, rows, _):
    fig, ax = plt.subplots(figsize=(7, 5))
    for delta in config.delta_t_list:
        sub = [r for r in _rows_of_kind(rows, "mean") if r["delta_t"] == str(delta)]
        sub.sort(key=lambda r: float(r["gamma_tilde_db"]))
        ax.plot(
            [float(r["gamma_tilde_db"]) for r in sub],
            [float(r["capacity_normalized"]) for r in sub],
            "o-", label=f"$\\delta_t$={delta}",
        )
    ax.set_xlabel("normalized SNR (dB)")
    ax.set_ylabel("capacity per spatial degree of freedom (nats)")
    ax.set_title(f"CSIR capacity, L_t={config.l_t}, L_r={config.l_r}")
    ax.grid(True, alpha=0.4)
    ax.legend()
    return fig


def _plot_qpsk(config: ExperimentConfig, rows, _):
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(12, 5))
    medians = _rows_of_kind(rows, "median")
    for delta in config.delta_t_list:
        sub = [r for r in medians if r["delta_t"] == str(delta)]
        sub.sort(key=lambda r: float(r["gamma_tilde_db"]))
        db = [float(r["gamma_tilde_db"]) for r in sub]
        ax1.plot(db, [float(r["ratio"]) for r in sub], "o-", label=f"$\\delta_t$={delta}")
        ax2.plot(db, [float(r["qpsk_normalized"]) for r in sub], "o-",
                 label=f"$\\delta_t$={delta}")
    ax1.set_xlabel("normalized SNR (dB)")
    ax1.set_ylabel("median QPSK / Gaussian rate ratio")
    ax1.grid(True, alpha=0.4)
    ax1.legend()
    ax2.set_xlabel("normalized SNR (dB)")
    ax2.set_ylabel("median QPSK bound per degree of freedom (nats)")
    ax2.grid(True, alpha=0.4)
    ax2.legend()
    fig.suptitle(f"QPSK lower bound vs Gaussian rate, {config.precoder} precoder")
    return fig


def _plot_theorem_sweep(config: ExperimentConfig, rows, _):
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(12, 5))
    means = _rows_of_kind(rows, "mean")
    for (l_t, l_r) in config.sizes:
        for delta in config.delta_t_list:
            sub = [
                r for r in means
                if int(r["l_t"]) == l_t and r["delta_t"] == str(delta)
            ]
            sub.sort(key=lambda r: float(r["gamma_tilde_db"]))
            db = [float(r["gamma_tilde_db"]) for r in sub]
            label = f"L_t={l_t}, $\\delta_t$={delta}"
            ax1.semilogy(db, [float(r["gap_truncation_normalized"]) for r in sub], "o-", label=label)
            ax2.semilogy(db, [float(r["gap_spacing_normalized"]) for r in sub], "o-", label=label)
    ax1.set_title("truncation gap")
    ax2.set_title("spacing gap")
    for ax in (ax1, ax2):
        ax.set_xlabel("normalized SNR (dB)")
        ax.set_ylabel("mean normalized capacity gap (nats)")
        ax.grid(True, alpha=0.4)
        ax.legend(fontsize=8)
    return fig


def _plot_lemma_check(config: ExperimentConfig, rows, _):
    fig, ax = plt.subplots(figsize=(9, 5))
    scans = [r for r in rows if r["quantity"] in ("sidelobe_overlap", "respacing_mismatch")]
    for quantity, marker in (("sidelobe_overlap", "o"), ("respacing_mismatch", "s")):
        for delta in sorted({r["delta"] for r in scans}):
            sub = [r for r in scans if r["quantity"] == quantity and r["delta"] == delta]
            sub.sort(key=lambda r: int(r["length"]))
            if not sub:
                continue
            ax.plot(
                [int(r["length"]) for r in sub],
                [float(r["grid_max"]) for r in sub],
                marker=marker, linestyle="-",
                label=f"{quantity}, $\\delta$={delta}",
            )
    ax.set_xlabel("array length L")
    ax.set_ylabel("scaled grid maximum")
    ax.set_title("Kernel-sum scan maxima (scaled by $s_L$)")
    ax.grid(True, alpha=0.4)
    ax.legend(fontsize=8)
    return fig


_PLOTTERS = {
    "beam_pattern": _plot_beam_pattern,
    "fig2": _plot_fig2,
    "fig3": _plot_fig3,
    "qpsk_sweep": _plot_qpsk,
    "theorem_sweep": _plot_theorem_sweep,
    "lemma_check": _plot_lemma_check,
}


def render_figure(config: ExperimentConfig, rows: list[dict[str, str]], out_path: str) -> str:
    """Render the experiment's figure next to its CSV; returns the path."""
    fig = _PLOTTERS[config.experiment](config, rows, None)
    fig.savefig(out_path, dpi=130, bbox_inches="tight")
    plt.close(fig)
    return out_path
