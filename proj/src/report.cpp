#include "bcfp/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

namespace bcfp {

namespace {

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::map<std::string, std::vector<const MetricRecord*>> by_config(const std::vector<MetricRecord>& records) {
    std::map<std::string, std::vector<const MetricRecord*>> out;
    for (const auto& r : records) {
        out[r.config].push_back(&r);
    }
    return out;
}

std::vector<double> values_of(const std::vector<const MetricRecord*>& rs, Metric m) {
    std::vector<double> out;
    out.reserve(rs.size());
    for (const auto* r : rs) {
        out.push_back(metric_value(*r, m));
    }
    return out;
}

// Round step for roughly `count` ticks over `span`.
double tick_step(double span, int count) {
    const double raw = span / count;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double f : {1.0, 2.0, 2.5, 5.0, 10.0}) {
        if (raw <= f * mag) {
            return f * mag;
        }
    }
    return 10.0 * mag;
}

}  // namespace

std::string_view to_string(Metric m) noexcept {
    switch (m) {
        case Metric::Auroc: return "auroc";
        case Metric::Auprc: return "auprc";
        case Metric::F1: return "f1";
    }
    return "?";
}

double metric_value(const MetricRecord& r, Metric m) noexcept {
    switch (m) {
        case Metric::Auroc: return r.auroc;
        case Metric::Auprc: return r.auprc;
        case Metric::F1: return r.f1;
    }
    return 0.0;
}

const Summary& ConfigSummary::of(Metric m) const noexcept {
    switch (m) {
        case Metric::Auroc: return auroc;
        case Metric::Auprc: return auprc;
        case Metric::F1: return f1;
    }
    return auroc;
}

std::vector<std::string> ordered_configs(std::vector<std::string> ids) {
    auto key = [](const std::string& id) {
        const auto s = parse_scheme_id(id);
        if (!s) {
            return std::make_tuple(1, 0, 0, 0, 0, id);
        }
        return std::make_tuple(0, s->radius, static_cast<int>(s->kind), static_cast<int>(s->pooling),
                               s->oov ? 1 : 0, id);
    };
    std::sort(ids.begin(), ids.end(), [&](const std::string& a, const std::string& b) { return key(a) < key(b); });
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

std::vector<ConfigSummary> summarize_records(const std::vector<MetricRecord>& records) {
    const auto groups = by_config(records);
    std::vector<std::string> ids;
    for (const auto& [id, rs] : groups) ids.push_back(id);
    std::vector<ConfigSummary> out;
    for (const auto& id : ordered_configs(ids)) {
        const auto& rs = groups.at(id);
        out.push_back({id, summarize(values_of(rs, Metric::Auroc)), summarize(values_of(rs, Metric::Auprc)),
                       summarize(values_of(rs, Metric::F1))});
    }
    return out;
}

std::string format_mean_std(const Summary& s) { return fixed(s.mean, 3) + "±" + fixed(s.stddev, 3); }

std::vector<TukeyRow> tukey_rows(const std::vector<MetricRecord>& records, double alpha) {
    const auto groups = by_config(records);
    std::vector<std::string> ids;
    for (const auto& [id, rs] : groups) {
        if (rs.size() >= 2) ids.push_back(id);
    }
    ids = ordered_configs(ids);
    std::vector<TukeyRow> out;
    if (ids.size() < 2) {
        return out;
    }
    for (Metric m : kMetrics) {
        std::vector<std::vector<double>> values;
        for (const auto& id : ids) values.push_back(values_of(groups.at(id), m));
        const TukeyResult result = tukey_hsd(values, alpha);
        for (const auto& p : result.pairs) {
            out.push_back({m, ids[p.a], ids[p.b], p});
        }
    }
    return out;
}

void write_tukey_csv(std::ostream& out, const std::vector<TukeyRow>& rows) {
    out << "metric,config_a,config_b,diff,q,p,significant\n";
    for (const auto& r : rows) {
        out << to_string(r.metric) << ',' << csv_escape(r.config_a) << ',' << csv_escape(r.config_b) << ','
            << full(r.pair.diff) << ',' << full(r.pair.q) << ',' << full(r.pair.p) << ','
            << (r.pair.significant ? "true" : "false") << '\n';
    }
}

// --- SVG ---------------------------------------------------------------------

std::string render_boxplot_svg(const std::vector<MetricRecord>& records, Metric metric) {
    const auto groups = by_config(records);
    std::vector<std::string> ids;
    for (const auto& [id, rs] : groups) ids.push_back(id);
    ids = ordered_configs(ids);

    struct Box {
        std::string id;
        std::string group;
        Summary s;
        std::vector<double> values;
    };
    std::vector<Box> boxes;
    double lo = 1.0;
    double hi = 0.0;
    for (const auto& id : ids) {
        Box b;
        b.id = id;
        const auto scheme = parse_scheme_id(id);
        b.group = scheme ? "r=" + std::to_string(scheme->radius) : "other";
        b.values = values_of(groups.at(id), metric);
        b.s = summarize(b.values);
        lo = std::min(lo, b.s.min);
        hi = std::max(hi, b.s.max);
        boxes.push_back(std::move(b));
    }
    if (boxes.empty()) {
        lo = 0.0;
        hi = 1.0;
    }
    if (hi - lo < 1e-6) {
        lo -= 0.05;
        hi += 0.05;
    }
    const double step = tick_step(hi - lo, 5);
    lo = std::floor(lo / step) * step;
    hi = std::ceil(hi / step) * step;

    std::size_t best = 0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        if (boxes[i].s.mean > boxes[best].s.mean) best = i;
        if (boxes[i].s.mean < boxes[worst].s.mean) worst = i;
    }

    constexpr double kLeft = 70.0;
    constexpr double kTop = 50.0;
    constexpr double kPlotHeight = 320.0;
    constexpr double kSlot = 44.0;
    constexpr double kGroupGap = 22.0;
    constexpr double kBoxWidth = 24.0;

    std::vector<double> centers;
    double x = kLeft + 10.0;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        if (i > 0 && boxes[i].group != boxes[i - 1].group) x += kGroupGap;
        centers.push_back(x + kSlot / 2.0);
        x += kSlot;
    }
    const double width = x + 30.0;
    const double height = kTop + kPlotHeight + 190.0;
    auto y_of = [&](double v) { return kTop + kPlotHeight * (hi - v) / (hi - lo); };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(width, 0) << "\" height=\""
        << fixed(height, 0) << "\" viewBox=\"0 0 " << fixed(width, 0) << ' ' << fixed(height, 0)
        << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << fixed(width / 2, 1) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
        << (metric == Metric::Auroc ? "AUROC" : metric == Metric::Auprc ? "AUPRC" : "F1") << " by configuration</text>\n";

    // axis and grid
    svg << "<g stroke=\"#999\" stroke-width=\"1\">\n"
        << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + kPlotHeight
        << "\"/>\n</g>\n";
    for (double t = lo; t <= hi + step / 2; t += step) {
        const double y = y_of(t);
        svg << "<line x1=\"" << kLeft << "\" y1=\"" << fixed(y, 1) << "\" x2=\"" << fixed(width - 20, 1) << "\" y2=\""
            << fixed(y, 1) << "\" stroke=\"#eee\"/>\n"
            << "<text x=\"" << kLeft - 6 << "\" y=\"" << fixed(y + 4, 1) << "\" text-anchor=\"end\">"
            << fixed(t, step < 0.01 ? 3 : 2) << "</text>\n";
    }

    for (std::size_t i = 0; i < boxes.size(); ++i) {
        const Box& b = boxes[i];
        const double cx = centers[i];
        const double iqr = b.s.q3 - b.s.q1;
        double whisker_lo = b.s.q1;
        double whisker_hi = b.s.q3;
        for (double v : b.values) {
            if (v >= b.s.q1 - 1.5 * iqr) whisker_lo = std::min(whisker_lo, v);
            if (v <= b.s.q3 + 1.5 * iqr) whisker_hi = std::max(whisker_hi, v);
        }
        const char* fill = i == best ? "#9bd49b" : i == worst ? "#f2a6a6" : "#c6d6ec";
        if (boxes.size() == 1) fill = "#c6d6ec";
        svg << "<g class=\"box\" data-config=\"" << xml_escape(b.id) << "\">\n"
            << "<title>" << xml_escape(b.id) << ": mean " << fixed(b.s.mean, 3) << ", median "
            << fixed(b.s.median, 3) << ", n " << b.s.n << "</title>\n"
            << "<line x1=\"" << fixed(cx, 1) << "\" y1=\"" << fixed(y_of(whisker_hi), 1) << "\" x2=\""
            << fixed(cx, 1) << "\" y2=\"" << fixed(y_of(whisker_lo), 1) << "\" stroke=\"#333\"/>\n";
        for (double w : {whisker_lo, whisker_hi}) {
            svg << "<line x1=\"" << fixed(cx - kBoxWidth / 4, 1) << "\" y1=\"" << fixed(y_of(w), 1) << "\" x2=\""
                << fixed(cx + kBoxWidth / 4, 1) << "\" y2=\"" << fixed(y_of(w), 1) << "\" stroke=\"#333\"/>\n";
        }
        svg << "<rect x=\"" << fixed(cx - kBoxWidth / 2, 1) << "\" y=\"" << fixed(y_of(b.s.q3), 1)
            << "\" width=\"" << kBoxWidth << "\" height=\"" << fixed(std::max(0.5, y_of(b.s.q1) - y_of(b.s.q3)), 1)
            << "\" fill=\"" << fill << "\" stroke=\"#333\"/>\n"
            << "<line x1=\"" << fixed(cx - kBoxWidth / 2, 1) << "\" y1=\"" << fixed(y_of(b.s.median), 1)
            << "\" x2=\"" << fixed(cx + kBoxWidth / 2, 1) << "\" y2=\"" << fixed(y_of(b.s.median), 1)
            << "\" stroke=\"#000\" stroke-width=\"2\"/>\n";
        for (double v : b.values) {
            if (v < whisker_lo || v > whisker_hi) {
                svg << "<circle cx=\"" << fixed(cx, 1) << "\" cy=\"" << fixed(y_of(v), 1)
                    << "\" r=\"2.5\" fill=\"none\" stroke=\"#333\"/>\n";
            }
        }
        if (boxes.size() > 1 && (i == best || i == worst)) {
            svg << "<text x=\"" << fixed(cx, 1) << "\" y=\"" << fixed(y_of(whisker_hi) - 6, 1)
                << "\" text-anchor=\"middle\" font-weight=\"bold\">" << (i == best ? "best" : "worst") << "</text>\n";
        }
        const double ly = kTop + kPlotHeight + 10;
        svg << "<text x=\"" << fixed(cx, 1) << "\" y=\"" << fixed(ly, 1) << "\" text-anchor=\"end\" transform=\"rotate(-60 "
            << fixed(cx, 1) << ' ' << fixed(ly, 1) << ")\">" << xml_escape(b.id) << "</text>\n"
            << "</g>\n";
    }

    // radius group captions
    for (std::size_t i = 0; i < boxes.size();) {
        std::size_t j = i;
        while (j < boxes.size() && boxes[j].group == boxes[i].group) ++j;
        const double mid = (centers[i] + centers[j - 1]) / 2.0;
        svg << "<text x=\"" << fixed(mid, 1) << "\" y=\"" << fixed(height - 12, 1)
            << "\" text-anchor=\"middle\" font-size=\"13\">" << xml_escape(boxes[i].group) << "</text>\n";
        if (j < boxes.size()) {
            const double sep = (centers[j - 1] + centers[j]) / 2.0;
            svg << "<line x1=\"" << fixed(sep, 1) << "\" y1=\"" << kTop << "\" x2=\"" << fixed(sep, 1) << "\" y2=\""
                << kTop + kPlotHeight << "\" stroke=\"#bbb\" stroke-dasharray=\"4 3\"/>\n";
        }
        i = j;
    }
    svg << "</svg>\n";
    return svg.str();
}

// --- report ------------------------------------------------------------------

ReportOutput write_report(const std::vector<MetricRecord>& records, const std::filesystem::path& out_dir,
                          double alpha, const std::vector<std::string>& expected_configs) {
    if (records.empty()) {
        throw DataError("no records to report");
    }
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    ReportOutput out;

    const auto summaries = summarize_records(records);
    std::size_t max_n = 0;
    for (const auto& s : summaries) max_n = std::max(max_n, s.auroc.n);
    for (const auto& s : summaries) {
        if (s.auroc.n < max_n) {
            out.warnings.push_back("MissingConfig: " + s.config + " has " + std::to_string(s.auroc.n) + " of " +
                                   std::to_string(max_n) + " splits");
        }
    }
    for (const auto& id : expected_configs) {
        const bool present = std::any_of(summaries.begin(), summaries.end(),
                                         [&](const ConfigSummary& s) { return s.config == id; });
        if (!present) {
            out.warnings.push_back("MissingConfig: " + id + " has no records");
        }
    }

    // Table
    std::size_t width = 6;
    for (const auto& s : summaries) width = std::max(width, s.config.size());
    std::ostringstream table;
    auto pad = [](std::string s, std::size_t w) {
        s.resize(std::max(s.size(), w), ' ');
        return s;
    };
    table << pad("config", width) << "    n  " << pad("AUROC", 13) << "  " << pad("AUPRC", 13) << "  F1\n";
    for (const auto& s : summaries) {
        char n[16];
        std::snprintf(n, sizeof n, "%5zu", s.auroc.n);
        // The ± sign is one column wide but two bytes.
        table << pad(s.config, width) << n << "  " << pad(format_mean_std(s.auroc), 14) << "  "
              << pad(format_mean_std(s.auprc), 14) << "  " << format_mean_std(s.f1) << '\n';
    }
    if (summaries.size() > 1) {
        for (Metric m : kMetrics) {
            const auto [lo, hi] = std::minmax_element(summaries.begin(), summaries.end(),
                                                      [&](const ConfigSummary& a, const ConfigSummary& b) {
                                                          return a.of(m).mean < b.of(m).mean;
                                                      });
            table << "best " << to_string(m) << ": " << hi->config << " (" << fixed(hi->of(m).mean, 3) << "), worst: "
                  << lo->config << " (" << fixed(lo->of(m).mean, 3) << ")\n";
        }
    }
    out.table = table.str();

    {
        const fs::path path = out_dir / "summary.csv";
        std::ofstream csv(path);
        csv << "config,n";
        for (Metric m : kMetrics) {
            csv << ',' << to_string(m) << "_mean," << to_string(m) << "_std," << to_string(m) << "_median";
        }
        csv << '\n';
        for (const auto& s : summaries) {
            csv << csv_escape(s.config) << ',' << s.auroc.n;
            for (Metric m : kMetrics) {
                csv << ',' << full(s.of(m).mean) << ',' << full(s.of(m).stddev) << ',' << full(s.of(m).median);
            }
            csv << '\n';
        }
        out.files.push_back(path);
    }

    out.tukey = tukey_rows(records, alpha);
    const fs::path tukey_path = out_dir / "tukey.csv";
    if (out.tukey.empty()) {
        out.warnings.push_back("Tukey HSD skipped: fewer than two configs with at least two records");
        fs::remove(tukey_path);
    } else {
        std::ofstream csv(tukey_path);
        write_tukey_csv(csv, out.tukey);
        out.files.push_back(tukey_path);
    }

    for (Metric m : kMetrics) {
        const fs::path path = out_dir / ("boxplot_" + std::string(to_string(m)) + ".svg");
        std::ofstream svg(path);
        svg << render_boxplot_svg(records, m);
        out.files.push_back(path);
    }
    return out;
}

}  // namespace bcfp
