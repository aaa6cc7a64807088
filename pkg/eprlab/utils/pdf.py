from fpdf import FPDF


SUMMARY_KEYS = ("lhs", "rhs", "margin", "R_hat", "delta_hat", "p_value", "fraction_within")


def _format_value(value):
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _ellipsize_to_width(pdf, text, max_width):
    if pdf.get_string_width(text) <= max_width:
        return text

    ellipsis = "..."
    if pdf.get_string_width(ellipsis) >= max_width:
        return ellipsis

    trimmed = text
    while trimmed and pdf.get_string_width(trimmed + ellipsis) > max_width:
        trimmed = trimmed[:-1]
    return trimmed + ellipsis


def _fit_font_size(pdf, labels, max_size, min_size):
    for size in range(max_size, min_size - 1, -1):
        pdf.set_font("Helvetica", style="B", size=size)
        if all(pdf.get_string_width(text) <= width for text, width in labels):
            return size
    return min_size


def _summary(payload):
    """One line of the headline numbers of a report."""
    if not isinstance(payload, dict):
        return _format_value(payload)
    parts = [f"{key}={_format_value(payload[key])}" for key in SUMMARY_KEYS if key in payload]
    if "checks" in payload:
        failed = [name for name, ok in payload["checks"].items() if not ok]
        parts.append("failed: " + ", ".join(failed) if failed else "all checks passed")
    if "reports" in payload:
        inner = payload["reports"]
        passed = sum(1 for r in inner if r.get("pass"))
        parts.append(f"{passed}/{len(inner)} checks passed")
    if "rows" in payload and isinstance(payload["rows"], list):
        parts.append(f"{len(payload['rows'])} rows")
    return "; ".join(parts)


def _verdict(passed):
    if passed is None:
        return "-"
    return "pass" if passed else "FAIL"


def render_run_pdf(run):
    pdf = FPDF(orientation="L")
    pdf.set_auto_page_break(auto=True, margin=12)
    pdf.add_page()

    pdf.set_font("Helvetica", style="B", size=14)
    pdf.cell(0, 10, f"eprlab run {run.id}: {run.kind}", ln=True, align="C")
    pdf.set_font("Helvetica", size=9)
    meta = (
        f"status {run.status} (exit {run.exit_code})   seed {run.seed}   "
        f"replicas {run.replicas}   workers {run.workers}"
    )
    pdf.cell(0, 6, meta, ln=True, align="C")
    page_width = pdf.w - pdf.l_margin - pdf.r_margin
    pdf.cell(0, 6, _ellipsize_to_width(pdf, run.out_dir, page_width), ln=True, align="C")
    pdf.ln(4)

    name_width = 40
    verdict_width = 18
    summary_width = page_width - name_width - verdict_width
    header_font = _fit_font_size(
        pdf,
        [("Report", name_width), ("Result", verdict_width), ("Summary", summary_width)],
        max_size=10,
        min_size=6,
    )
    row_height = 7

    pdf.set_font("Helvetica", style="B", size=header_font)
    pdf.cell(name_width, row_height + 1, "Report", border=1, align="C")
    pdf.cell(verdict_width, row_height + 1, "Result", border=1, align="C")
    pdf.cell(summary_width, row_height + 1, "Summary", border=1, align="C")
    pdf.ln()

    pdf.set_font("Helvetica", size=8)
    for report in run.reports:
        pdf.cell(name_width, row_height, _ellipsize_to_width(pdf, report.name, name_width), border=1)
        pdf.cell(verdict_width, row_height, _verdict(report.passed), border=1, align="C")
        pdf.cell(
            summary_width,
            row_height,
            _ellipsize_to_width(pdf, _summary(report.data), summary_width - 2),
            border=1,
        )
        pdf.ln()

    if run.error:
        pdf.ln(4)
        pdf.set_font("Helvetica", style="B", size=9)
        pdf.cell(0, 6, "Error", ln=True)
        pdf.set_font("Helvetica", size=8)
        pdf.multi_cell(0, 5, run.error)

    pdf_bytes = pdf.output(dest="S")
    if isinstance(pdf_bytes, str):
        return pdf_bytes.encode("latin-1")
    return bytes(pdf_bytes)
