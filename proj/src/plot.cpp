#include "reslab/plot.hpp"

#include "reslab/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

namespace reslab {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 460.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 180.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;
constexpr double kPlotW = kWidth - kLeft - kRight;
constexpr double kPlotH = kHeight - kTop - kBottom;

constexpr std::array<const char*, 10> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

std::string escape(const std::string& s) {
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

struct Range {
    double lo, hi;

    static Range of(const std::vector<double>& v, double pad_fraction) {
        auto [mn, mx] = std::minmax_element(v.begin(), v.end());
        double lo = *mn, hi = *mx;
        if (hi - lo < 1e-12) {
            const double pad = std::max(0.5, std::abs(lo) * 0.1);
            return {lo - pad, hi + pad};
        }
        const double pad = (hi - lo) * pad_fraction;
        return {lo - pad, hi + pad};
    }
    double to_x(double v) const { return kLeft + (v - lo) / (hi - lo) * kPlotW; }
    double to_y(double v) const { return kTop + kPlotH - (v - lo) / (hi - lo) * kPlotH; }
};

Range ap_range(const std::vector<double>& values) {
    Range r{0.0, 1.0};
    for (double v : values) {
        r.lo = std::min(r.lo, v);
        r.hi = std::max(r.hi, v);
    }
    return r;
}

class Svg {
public:
    explicit Svg(const std::string& title) {
        out_ += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
        out_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt("%.0f", kWidth) + "\" height=\"" +
                fmt("%.0f", kHeight) + "\" viewBox=\"0 0 " + fmt("%.0f", kWidth) + " " + fmt("%.0f", kHeight) +
                "\" font-family=\"sans-serif\" font-size=\"12\">\n";
        out_ += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        text(kLeft + kPlotW / 2, 22, title, "middle", 14);
    }

    void text(double x, double y, const std::string& s, const char* anchor = "start", int size = 12) {
        out_ += "<text x=\"" + fmt("%.2f", x) + "\" y=\"" + fmt("%.2f", y) + "\" text-anchor=\"" + anchor +
                "\" font-size=\"" + std::to_string(size) + "\">" + escape(s) + "</text>\n";
    }

    void line(double x1, double y1, double x2, double y2, const char* stroke = "black", double width = 1.0) {
        out_ += "<line x1=\"" + fmt("%.2f", x1) + "\" y1=\"" + fmt("%.2f", y1) + "\" x2=\"" + fmt("%.2f", x2) +
                "\" y2=\"" + fmt("%.2f", y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"" + fmt("%.2f", width) +
                "\"/>\n";
    }

    void rect(double x, double y, double w, double h, const std::string& fill) {
        out_ += "<rect x=\"" + fmt("%.2f", x) + "\" y=\"" + fmt("%.2f", y) + "\" width=\"" + fmt("%.2f", w) +
                "\" height=\"" + fmt("%.2f", h) + "\" fill=\"" + fill + "\"/>\n";
    }

    void circle(double x, double y, double r, const char* fill) {
        out_ += "<circle cx=\"" + fmt("%.2f", x) + "\" cy=\"" + fmt("%.2f", y) + "\" r=\"" + fmt("%.2f", r) +
                "\" fill=\"" + fill + "\"/>\n";
    }

    void polyline(const std::vector<std::pair<double, double>>& pts, const char* stroke) {
        out_ += "<polyline fill=\"none\" stroke=\"";
        out_ += stroke;
        out_ += "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i) out_ += ' ';
            out_ += fmt("%.2f", pts[i].first) + "," + fmt("%.2f", pts[i].second);
        }
        out_ += "\"/>\n";
    }

    // Frame, ticks and labels for numeric x and y axes.
    void axes(const Range& x, const Range& y, const std::string& xlabel, const std::string& ylabel) {
        line(kLeft, kTop + kPlotH, kLeft + kPlotW, kTop + kPlotH);
        line(kLeft, kTop, kLeft, kTop + kPlotH);
        for (int i = 0; i <= 5; ++i) {
            const double vx = x.lo + (x.hi - x.lo) * i / 5.0;
            const double px = x.to_x(vx);
            line(px, kTop + kPlotH, px, kTop + kPlotH + 5);
            text(px, kTop + kPlotH + 18, fmt("%.3g", vx), "middle");
            const double vy = y.lo + (y.hi - y.lo) * i / 5.0;
            const double py = y.to_y(vy);
            line(kLeft - 5, py, kLeft, py);
            text(kLeft - 8, py + 4, fmt("%.3g", vy), "end");
        }
        text(kLeft + kPlotW / 2, kHeight - 18, xlabel, "middle");
        out_ += "<text x=\"18\" y=\"" + fmt("%.2f", kTop + kPlotH / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
                fmt("%.2f", kTop + kPlotH / 2) + ")\">" + escape(ylabel) + "</text>\n";
    }

    void legend_entry(std::size_t index, const std::string& label, const char* color) {
        const double y = kTop + 10 + 18.0 * static_cast<double>(index);
        const double x = kLeft + kPlotW + 20;
        line(x, y - 4, x + 22, y - 4, color, 2.0);
        text(x + 28, y, label);
    }

    std::string finish() {
        out_ += "</svg>\n";
        return std::move(out_);
    }

private:
    std::string out_;
};

// Rows grouped by series label in first-appearance order.
std::vector<std::pair<std::string, std::vector<const ScoreRow*>>> group_series(const std::vector<ScoreRow>& rows) {
    std::vector<std::pair<std::string, std::vector<const ScoreRow*>>> groups;
    std::map<std::string, std::size_t> where;
    for (const auto& r : rows) {
        const std::string key = r.series();
        auto it = where.find(key);
        if (it == where.end()) {
            it = where.emplace(key, groups.size()).first;
            groups.emplace_back(key, std::vector<const ScoreRow*>{});
        }
        groups[it->second].second.push_back(&r);
    }
    return groups;
}

std::string heat_color(double v) {
    // Five viridis anchors, linearly interpolated.
    static constexpr std::array<std::array<double, 3>, 5> stops = {
        {{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
    const double t = std::clamp(v, 0.0, 1.0) * 4.0;
    const std::size_t i = std::min<std::size_t>(3, static_cast<std::size_t>(t));
    const double f = t - static_cast<double>(i);
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                  static_cast<int>(std::lround(stops[i][0] + f * (stops[i + 1][0] - stops[i][0]))),
                  static_cast<int>(std::lround(stops[i][1] + f * (stops[i + 1][1] - stops[i][1]))),
                  static_cast<int>(std::lround(stops[i][2] + f * (stops[i + 1][2] - stops[i][2]))));
    return buf;
}

std::string render_line(const std::vector<ScoreRow>& rows, const std::string& id) {
    const bool by_sigma = rows.front().experiment == ExperimentId::kExp2;
    const auto x_of = [&](const ScoreRow& r) -> double {
        const auto& v = by_sigma ? r.sigma : r.intensity;
        require(v.has_value(), ErrorCode::kInvalidArgument,
                std::string("line plot: row without ") + (by_sigma ? "sigma" : "intensity"));
        return *v;
    };
    std::vector<double> xs, ys;
    for (const auto& r : rows) {
        xs.push_back(x_of(r));
        ys.push_back(r.mean_ap);
    }
    const Range xr = Range::of(xs, 0.0), yr = ap_range(ys);
    Svg svg(id + ": mean AP");
    svg.axes(xr, yr, by_sigma ? "blur sigma" : "anomaly intensity I", "mean AP");
    const auto groups = group_series(rows);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const char* color = kPalette[g % kPalette.size()];
        std::vector<std::pair<double, double>> pts;
        for (const ScoreRow* r : groups[g].second) pts.emplace_back(x_of(*r), r->mean_ap);
        std::stable_sort(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.first < b.first; });
        std::vector<std::pair<double, double>> px;
        for (auto [x, y] : pts) px.emplace_back(xr.to_x(x), yr.to_y(y));
        if (px.size() > 1) svg.polyline(px, color);
        for (auto [x, y] : px) svg.circle(x, y, 2.5, color);
        svg.legend_entry(g, groups[g].first, color);
    }
    return svg.finish();
}

std::string render_heatmap(const std::vector<ScoreRow>& rows, const std::string& id) {
    std::set<double> xset, yset;
    std::map<std::pair<double, double>, double> cells;
    for (const auto& r : rows) {
        require(r.intensity.has_value() && r.sigma.has_value(), ErrorCode::kInvalidArgument,
                "heatmap: every row needs an intensity and a sigma");
        xset.insert(*r.intensity);
        yset.insert(*r.sigma);
        cells[{*r.intensity, *r.sigma}] = r.mean_ap;
    }
    const std::vector<double> xs(xset.begin(), xset.end()), ys(yset.begin(), yset.end());
    Svg svg(id + ": mean AP over intensity x sigma");
    const double cw = kPlotW / static_cast<double>(xs.size());
    const double ch = kPlotH / static_cast<double>(ys.size());
    for (std::size_t yi = 0; yi < ys.size(); ++yi) {
        for (std::size_t xi = 0; xi < xs.size(); ++xi) {
            const auto it = cells.find({xs[xi], ys[yi]});
            const double top = kTop + kPlotH - ch * static_cast<double>(yi + 1);
            svg.rect(kLeft + cw * static_cast<double>(xi), top, cw, ch,
                     it == cells.end() ? std::string("#dddddd") : heat_color(it->second));
        }
    }
    const std::size_t xstep = std::max<std::size_t>(1, xs.size() / 10);
    for (std::size_t xi = 0; xi < xs.size(); xi += xstep) {
        svg.text(kLeft + cw * (static_cast<double>(xi) + 0.5), kTop + kPlotH + 18, fmt("%.3g", xs[xi]), "middle");
    }
    for (std::size_t yi = 0; yi < ys.size(); ++yi) {
        svg.text(kLeft - 8, kTop + kPlotH - ch * (static_cast<double>(yi) + 0.5) + 4, fmt("%.3g", ys[yi]), "end");
    }
    svg.text(kLeft + kPlotW / 2, kHeight - 18, "anomaly intensity I", "middle");
    svg.text(12, kTop - 8, "sigma");
    for (int i = 0; i <= 10; ++i) {
        svg.rect(kLeft + kPlotW + 20, kTop + kPlotH - kPlotH * (i + 1) / 11.0, 20, kPlotH / 11.0,
                 heat_color(i / 10.0));
    }
    svg.text(kLeft + kPlotW + 46, kTop + kPlotH, "0");
    svg.text(kLeft + kPlotW + 46, kTop + 10, "1");
    return svg.finish();
}

std::string render_scatter(const std::vector<ScoreRow>& rows, const std::string& id) {
    const auto groups = group_series(rows);
    std::vector<double> xs, ys;
    for (const auto& [label, members] : groups) {
        double err = 0.0, ap = 0.0;
        for (const ScoreRow* r : members) {
            require(r->mean_recon_err.has_value(), ErrorCode::kInvalidArgument,
                    "scatter: row without a reconstruction error");
            err += *r->mean_recon_err;
            ap += r->mean_ap;
        }
        xs.push_back(err / static_cast<double>(members.size()));
        ys.push_back(ap / static_cast<double>(members.size()));
    }
    const Range xr = Range::of(xs, 0.08), yr = Range::of(ys, 0.08);
    Svg svg(id + ": reconstruction error vs mean AP");
    svg.axes(xr, yr, "mean healthy reconstruction error", "mean AP over intensities");
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const char* color = kPalette[g % kPalette.size()];
        svg.circle(xr.to_x(xs[g]), yr.to_y(ys[g]), 4.0, color);
        svg.legend_entry(g, groups[g].first, color);
    }
    return svg.finish();
}

}  // namespace

const char* to_string(PlotKind kind) {
    switch (kind) {
        case PlotKind::kLine: return "line";
        case PlotKind::kHeatmap: return "heatmap";
        case PlotKind::kScatter: return "scatter";
    }
    return "?";
}

PlotKind parse_plot_kind(std::string_view text) {
    for (auto k : {PlotKind::kLine, PlotKind::kHeatmap, PlotKind::kScatter}) {
        if (text == to_string(k)) return k;
    }
    throw Error(ErrorCode::kInvalidArgument, "unknown plot kind '" + std::string(text) + "'");
}

std::string render_plot(const std::vector<ScoreRow>& rows, PlotKind kind) {
    require(!rows.empty(), ErrorCode::kEmptyInput, "plot: score table is empty");
    const ExperimentId id = rows.front().experiment;
    for (const auto& r : rows) {
        require(r.experiment == id, ErrorCode::kInvalidArgument, "plot: rows mix experiment ids");
    }
    switch (kind) {
        case PlotKind::kLine: return render_line(rows, to_string(id));
        case PlotKind::kHeatmap: return render_heatmap(rows, to_string(id));
        case PlotKind::kScatter: return render_scatter(rows, to_string(id));
    }
    return {};
}

}  // namespace reslab
