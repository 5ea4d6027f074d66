"""Render run artifacts as aligned markdown tables.

Main-results convention: the best value in a metric column is **bold** when
its improvement over every other system is significant under the combined
test, and *italic* (tie for best) otherwise, along with every system not
significantly different from it.
"""

from __future__ import annotations

import json
from pathlib import Path

from ..errors import ConfigError

METRICS = ("bleu4", "meteor", "rouge_l", "cider")
METRIC_TITLES = {
    "bleu4": "BLEU-4",
    "meteor": "METEOR",
    "rouge_l": "ROUGE-L",
    "cider": "CIDEr",
}


def _fmt(metric: str, value: float) -> str:
    return f"{value:.3f}" if metric == "cider" else f"{value:.2f}"


def _table(header: list[str], rows: list[list[str]]) -> str:
    widths = [
        max(len(str(header[i])), *(len(str(r[i])) for r in rows)) if rows else len(header[i])
        for i in range(len(header))
    ]

    def line(cells):
        return "| " + " | ".join(str(c).ljust(w) for c, w in zip(cells, widths)) + " |"

    sep = "|" + "|".join("-" * (w + 2) for w in widths) + "|"
    return "\n".join([line(header), sep, *(line(r) for r in rows)])


def _significance_lookup(significance: list) -> dict:
    table = {}
    for entry in significance:
        for pair in entry["pairs"]:
            key = (entry["metric"], pair["system_a"], pair["system_b"])
            table[key] = pair
            table[(entry["metric"], pair["system_b"], pair["system_a"])] = pair
    return table


def main_results_markdown(summary: dict, significance: list) -> str:
    systems = list(summary["systems"])
    sig = _significance_lookup(significance)
    rows = []
    decorations: dict[str, dict[str, str]] = {m: {} for m in METRICS}
    for metric in METRICS:
        means = {s: summary["systems"][s][metric]["mean"] for s in systems}
        best = max(systems, key=lambda s: means[s])
        beats_all = True
        tied = [best]
        for other in systems:
            if other == best:
                continue
            pair = sig.get((metric, best, other))
            significant = bool(pair and pair["significant"])
            if not significant:
                beats_all = False
                tied.append(other)
        if beats_all and len(systems) > 1:
            decorations[metric][best] = "bold"
        else:
            for s in tied:
                decorations[metric][s] = "italic"
    for system in systems:
        row = [system]
        for metric in METRICS:
            text = _fmt(metric, summary["systems"][system][metric]["mean"])
            style = decorations[metric].get(system)
            if style == "bold":
                text = f"**{text}**"
            elif style == "italic":
                text = f"*{text}*"
            row.append(text)
        rows.append(row)
    header = ["system", *(METRIC_TITLES[m] for m in METRICS)]
    legend = (
        "**bold** = significant best; *italic* = statistical tie for best "
        f"(combined test, mean over {summary['J']} folds)"
    )
    return "## Main results\n\n" + _table(header, rows) + "\n\n" + legend


def diversity_markdown(diversity: dict) -> str:
    header = ["system", "vocab coverage %", "not copied %", "unique %"]
    rows = [
        [
            system,
            f"{d['vocab_coverage']:.1f}",
            f"{d['pct_not_copied']:.1f}",
            f"{d['pct_unique']:.1f}",
        ]
        for system, d in diversity.items()
    ]
    return "## Diversity\n\n" + _table(header, rows)


def significance_markdown(significance: list) -> str:
    blocks = []
    for entry in significance:
        rows = [
            [
                f"{p['system_a']} vs {p['system_b']}",
                f"{p['wilcoxon_p']:.4g}",
                f"{p['corrected_t_p']:.4g}",
                f"{p['combined_p']:.4g}",
                "yes" if p["significant"] else "no",
            ]
            for p in entry["pairs"]
        ]
        blocks.append(
            f"### {METRIC_TITLES[entry['metric']]}\n\n"
            + _table(["pair", "wilcoxon p", "corrected-t p", "combined p", "significant"], rows)
        )
    return "## Significance\n\n" + "\n\n".join(blocks)


def sweep_markdown(sweep: dict) -> str:
    systems = sorted(sweep["rouge_l"])
    header = ["label fraction", *systems]
    rows = []
    for i, fraction in enumerate(sweep["fractions"]):
        rows.append(
            [f"{fraction:.1f}", *(f"{sweep['rouge_l'][s][i]:.2f}" for s in systems)]
        )
    return f"## Oracle sweep (ROUGE-L, fold {sweep['fold']})\n\n" + _table(header, rows)


def complementarity_markdown(payload: dict) -> str:
    def topk(title, rows, key):
        table_rows = [[r["word"], f"{r[key]:.1f}"] for r in rows]
        return f"### {title}\n\n" + _table(["word", key], table_rows)

    corr = payload["spearman_stated_rate_vs_auc_delta"]
    freq_corr = payload["spearman_freq_vs_auc_delta"]
    parts = [
        "## Per-word modality complementarity",
        f"{payload['num_words']} word types analyzed.",
        topk("Easiest (mean AUC)", payload["easiest"], "auc_mu"),
        topk("Hardest (mean AUC)", payload["hardest"], "auc_mu"),
        topk("ASR better (AUC difference)", payload["asr_better"], "auc_delta"),
        topk("Video better (AUC difference)", payload["video_better"], "auc_delta"),
        (
            f"Spearman(stated rate, AUC difference): rho={corr['rho']:.3f}, "
            f"p={corr['p']:.4g}; Spearman(frequency, AUC difference): "
            f"rho={freq_corr['rho']:.3f}, p={freq_corr['p']:.4g}"
        ),
    ]
    return "\n\n".join(parts)


def render_report(output_dir: str | Path) -> str:
    """cmd_report: human-readable tables from prior command artifacts."""
    out = Path(output_dir)
    sections = []
    missing = []
    summary_path = out / "summary.json"
    if summary_path.is_file():
        summary = json.loads(summary_path.read_text("utf-8"))
        significance = json.loads((out / "significance.json").read_text("utf-8"))
        sections.append(main_results_markdown(summary, significance))
        diversity = json.loads((out / "diversity.json").read_text("utf-8"))
        sections.append(diversity_markdown(diversity))
        sections.append(significance_markdown(significance))
    else:
        missing.append("summary.json (produce it with: stepcap run --config CONFIG)")
    sweep_path = out / "sweep.json"
    if sweep_path.is_file():
        sections.append(sweep_markdown(json.loads(sweep_path.read_text("utf-8"))))
    comp_path = out / "complementarity.json"
    if comp_path.is_file():
        sections.append(
            complementarity_markdown(json.loads(comp_path.read_text("utf-8")))
        )
    if not sections:
        raise ConfigError(
            f"no artifacts found in {out}; missing: "
            + "; ".join(
                missing
                or ["summary.json (stepcap run)", "sweep.json (stepcap oracle-sweep)",
                    "complementarity.json (stepcap analyze)"]
            )
        )
    return "\n\n".join(["# stepcap report", *sections]) + "\n"
