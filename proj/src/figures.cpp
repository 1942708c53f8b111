#include "acfs/figures.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace acfs {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 84.0;
constexpr double kRight = 24.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 64.0;

struct Axis {
    bool log_scale = true;
    double lo = 0.0;
    double hi = 1.0;

    double y(double v) const {
        const double t = log_scale ? (std::log10(v) - lo) / (hi - lo) : (v - lo) / (hi - lo);
        return kHeight - kBottom - t * (kHeight - kTop - kBottom);
    }
};

std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

class Svg {
public:
    Svg() {
        os_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
            << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
            << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    }
    void line(double x1, double y1, double x2, double y2, const std::string& stroke = "#333",
              double width = 1.0) {
        os_ << "<line x1=\"" << x1 << "\" y1=\"" << y1 << "\" x2=\"" << x2 << "\" y2=\"" << y2
            << "\" stroke=\"" << stroke << "\" stroke-width=\"" << width << "\"/>\n";
    }
    void rect(double x, double y, double w, double h, const std::string& fill,
              const std::string& stroke = "#333") {
        os_ << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << w << "\" height=\"" << h
            << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\"/>\n";
    }
    void circle(double x, double y, double r, const std::string& fill) {
        os_ << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"" << r << "\" fill=\"" << fill
            << "\"/>\n";
    }
    void text(double x, double y, const std::string& s, double size = 12.0,
              const std::string& anchor = "middle", double rotate = 0.0) {
        os_ << "<text x=\"" << x << "\" y=\"" << y << "\" font-size=\"" << size
            << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor << '"';
        if (rotate != 0.0) os_ << " transform=\"rotate(" << rotate << ' ' << x << ' ' << y << ")\"";
        os_ << '>' << esc(s) << "</text>\n";
    }
    void save(const std::string& path) {
        os_ << "</svg>\n";
        std::ofstream out(path);
        out << os_.str();
    }

private:
    std::ostringstream os_;
};

void draw_log_axis(Svg& svg, const Axis& axis) {
    svg.line(kLeft, kTop, kLeft, kHeight - kBottom);
    svg.line(kLeft, kHeight - kBottom, kWidth - kRight, kHeight - kBottom);
    if (axis.log_scale) {
        const int d0 = static_cast<int>(std::floor(axis.lo));
        const int d1 = static_cast<int>(std::ceil(axis.hi));
        for (int d = d0; d <= d1; ++d) {
            if (d < axis.lo - 1e-9 || d > axis.hi + 1e-9) continue;
            const double y = axis.y(std::pow(10.0, d));
            svg.line(kLeft - 4, y, kLeft, y);
            std::ostringstream lab;
            lab << "1e" << d;
            svg.text(kLeft - 8, y + 4, lab.str(), 11, "end");
            svg.line(kLeft, y, kWidth - kRight, y, "#ddd", 0.5);
        }
    } else {
        for (int i = 0; i <= 5; ++i) {
            const double v = axis.lo + (axis.hi - axis.lo) * i / 5.0;
            const double y = axis.y(v);
            svg.line(kLeft - 4, y, kLeft, y);
            std::ostringstream lab;
            lab.precision(3);
            lab << v;
            svg.text(kLeft - 8, y + 4, lab.str(), 11, "end");
        }
    }
}

} // namespace

BoxStats box_stats(const std::vector<double>& values) {
    const SummaryStats s = summarize(values);
    BoxStats b;
    b.median = s.median;
    b.q25 = s.q25;
    b.q75 = s.q75;
    const double iqr = s.q75 - s.q25;
    const double lo_fence = s.q25 - 1.5 * iqr;
    const double hi_fence = s.q75 + 1.5 * iqr;
    b.lo_whisker = s.q75;
    b.hi_whisker = s.q25;
    bool any = false;
    for (double v : values) {
        if (v >= lo_fence && v <= hi_fence) {
            b.lo_whisker = any ? std::min(b.lo_whisker, v) : v;
            b.hi_whisker = any ? std::max(b.hi_whisker, v) : v;
            any = true;
        } else {
            b.outliers.push_back(v);
        }
    }
    if (!any) {
        b.lo_whisker = s.q25;
        b.hi_whisker = s.q75;
    }
    return b;
}

std::vector<std::string> emit_figures(const std::string& results_path, const std::string& out_dir) {
    const std::vector<ReplicationRow> rows = read_results(results_path);
    std::filesystem::create_directories(out_dir);

    // (dgp, lambda) -> method -> oracle J values, preserving file order
    std::vector<std::pair<std::string, double>> block_keys;
    std::map<std::string, std::vector<std::pair<std::string, std::vector<double>>>> blocks;
    const auto block_id = [](const std::string& dgp, double lambda) {
        std::ostringstream os;
        os << dgp << '@' << lambda;
        return os.str();
    };
    for (const ReplicationRow& r : rows) {
        if (!r.ok()) continue;
        const std::string id = block_id(r.dgp, r.lambda);
        if (!blocks.count(id)) block_keys.emplace_back(r.dgp, r.lambda);
        auto& methods = blocks[id];
        auto it = std::find_if(methods.begin(), methods.end(),
                               [&](const auto& m) { return m.first == r.method; });
        if (it == methods.end()) {
            methods.emplace_back(r.method, std::vector<double>{});
            it = methods.end() - 1;
        }
        it->second.push_back(r.oracle_j);
    }

    std::vector<std::string> files;
    for (const auto& [dgp, lambda] : block_keys) {
        const auto& methods = blocks[block_id(dgp, lambda)];
        double vmin = 1e300, vmax = -1e300;
        bool all_positive = true;
        for (const auto& [m, vals] : methods)
            for (double v : vals) {
                vmin = std::min(vmin, v);
                vmax = std::max(vmax, v);
                if (v <= 0.0) all_positive = false;
            }
        if (!(vmax > vmin)) vmax = vmin + 1.0;
        Axis axis;
        axis.log_scale = all_positive;
        if (axis.log_scale) {
            axis.lo = std::log10(vmin) - 0.05;
            axis.hi = std::log10(vmax) + 0.05;
        } else {
            axis.lo = vmin - 0.05 * (vmax - vmin);
            axis.hi = vmax + 0.05 * (vmax - vmin);
        }

        Svg svg;
        std::ostringstream title;
        title << dgp << "  lambda=" << lambda << "  oracle spectral risk";
        svg.text(kWidth / 2, 22, title.str(), 14);
        draw_log_axis(svg, axis);

        const double span = kWidth - kLeft - kRight;
        const double slot = span / static_cast<double>(methods.size());
        const double box_w = std::min(48.0, slot * 0.5);
        for (std::size_t m = 0; m < methods.size(); ++m) {
            const auto& [name, vals] = methods[m];
            if (vals.empty()) continue;
            const BoxStats b = box_stats(vals);
            const double cx = kLeft + slot * (static_cast<double>(m) + 0.5);
            svg.line(cx, axis.y(b.lo_whisker), cx, axis.y(b.q25));
            svg.line(cx, axis.y(b.q75), cx, axis.y(b.hi_whisker));
            svg.line(cx - box_w / 4, axis.y(b.lo_whisker), cx + box_w / 4, axis.y(b.lo_whisker));
            svg.line(cx - box_w / 4, axis.y(b.hi_whisker), cx + box_w / 4, axis.y(b.hi_whisker));
            svg.rect(cx - box_w / 2, axis.y(b.q75), box_w, axis.y(b.q25) - axis.y(b.q75),
                     "#9ecae1");
            svg.line(cx - box_w / 2, axis.y(b.median), cx + box_w / 2, axis.y(b.median), "#08306b",
                     2.0);
            for (double o : b.outliers) svg.circle(cx, axis.y(o), 2.0, "#555");
            svg.text(cx, kHeight - kBottom + 18, method_display(name), 11, "middle", 30);
        }
        std::ostringstream fname;
        fname << out_dir << "/box_" << dgp << "_lambda" << lambda << ".svg";
        svg.save(fname.str());
        files.push_back(fname.str());
    }
    return files;
}

std::vector<std::string> emit_sensitivity_figures(const std::vector<SensitivityPoint>& points,
                                                  const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::map<std::string, std::vector<const SensitivityPoint*>> by_param;
    std::vector<std::string> order;
    for (const SensitivityPoint& p : points) {
        if (!by_param.count(p.parameter)) order.push_back(p.parameter);
        by_param[p.parameter].push_back(&p);
    }
    std::vector<std::string> files;
    for (const std::string& param : order) {
        const auto& pts = by_param[param];
        double vmin = 1e300, vmax = -1e300;
        for (const SensitivityPoint* p : pts) {
            vmin = std::min(vmin, p->j.q25);
            vmax = std::max(vmax, p->j.q75);
        }
        Axis axis;
        axis.log_scale = false;
        axis.lo = vmin - 0.1 * (vmax - vmin) - 1.0;
        axis.hi = vmax + 0.1 * (vmax - vmin) + 1.0;

        Svg svg;
        svg.text(kWidth / 2, 22, param + "  (median and IQR of oracle J)", 14);
        draw_log_axis(svg, axis);
        const double span = kWidth - kLeft - kRight;
        const double slot = span / static_cast<double>(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const SensitivityPoint* p = pts[i];
            const double cx = kLeft + slot * (static_cast<double>(i) + 0.5);
            svg.line(cx, axis.y(p->j.q25), cx, axis.y(p->j.q75), "#3182bd", 3.0);
            svg.circle(cx, axis.y(p->j.median), 5.0, "#08306b");
            std::ostringstream lab;
            lab << p->value << (p->is_default ? "*" : "");
            svg.text(cx, kHeight - kBottom + 18, lab.str(), 11);
        }
        const std::string fname = out_dir + "/sensitivity_" + param + ".svg";
        svg.save(fname);
        files.push_back(fname);
    }
    return files;
}

} // namespace acfs
