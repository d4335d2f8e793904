#include "csiloc/outputs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "csiloc/metrics.hpp"

namespace csiloc {

namespace {

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::vector<Algorithm> algorithms_in(const ResultSet &results) {
    std::vector<Algorithm> algos;
    for (const AlgoSeedResult &r : results.entries)
        if (std::find(algos.begin(), algos.end(), r.algo) == algos.end())
            algos.push_back(r.algo);
    return algos;
}

} // namespace

std::string errors_csv(const ResultSet &results) {
    std::string out = "algorithm,seed,tp_index,error_m\n";
    for (const AlgoSeedResult &r : results.entries)
        for (std::size_t i = 0; i < r.errors.size(); ++i)
            out += std::string(algorithm_name(r.algo)) + "," +
                   std::to_string(r.seed) + "," + std::to_string(i) + "," +
                   fmt(r.errors[i]) + "\n";
    return out;
}

std::string cdf_csv(const ResultSet &results) {
    std::string out = "algorithm,error_m,probability\n";
    for (const Algorithm algo : algorithms_in(results)) {
        const auto errors = results.pooled_errors(algo);
        if (errors.empty())
            continue;
        for (const auto &[e, p] : error_cdf(errors))
            out += std::string(algorithm_name(algo)) + "," + fmt(e) + "," +
                   fmt(p) + "\n";
    }
    return out;
}

std::string stats_csv(const ResultSet &results) {
    // Table-2 shape: one row per algorithm, errors pooled across seeds,
    // timings averaged across seeds.
    std::string out = "algorithm,min_m,max_m,mean_m,train_s,position_s\n";
    for (const Algorithm algo : algorithms_in(results)) {
        const auto errors = results.pooled_errors(algo);
        if (errors.empty())
            continue;
        const ErrorStats s = error_stats(errors);
        double train = 0.0, pos = 0.0;
        long n = 0;
        for (const AlgoSeedResult &r : results.entries) {
            if (r.algo != algo)
                continue;
            train += r.train_s;
            pos += r.position_total_s;
            ++n;
        }
        out += std::string(algorithm_name(algo)) + "," + fmt(s.min) + "," +
               fmt(s.max) + "," + fmt(s.mean) + "," + fmt(train / n) + "," +
               fmt(pos / n) + "\n";
    }
    return out;
}

std::string timing_csv(const std::vector<SweepRow> &rows) {
    std::string out = "interval_m,algorithm,n_rps,train_s,position_s\n";
    for (const SweepRow &r : rows)
        out += fmt(r.interval) + "," + algorithm_name(r.algo) + "," +
               std::to_string(r.n_rps) + "," + fmt(r.train_s) + "," +
               fmt(r.position_total_s) + "\n";
    return out;
}

std::string cdf_svg(const ResultSet &results) {
    const int w = 640, h = 440;
    const int ml = 60, mr = 20, mt = 20, mb = 50;
    const double pw = w - ml - mr, ph = h - mt - mb;

    double max_err = 0.0;
    const auto algos = algorithms_in(results);
    for (const Algorithm a : algos)
        for (double e : results.pooled_errors(a))
            max_err = std::max(max_err, e);
    if (max_err <= 0.0)
        max_err = 1.0;

    const char *colors[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd"};
    std::string svg =
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) +
        "\" height=\"" + std::to_string(h) + "\" viewBox=\"0 0 " +
        std::to_string(w) + " " + std::to_string(h) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    auto px = [&](double e) { return ml + pw * e / max_err; };
    auto py = [&](double p) { return mt + ph * (1.0 - p); };

    // axes and ticks
    svg += "<g stroke=\"black\" fill=\"none\"><path d=\"M" + fmt(ml) + " " +
           fmt(mt) + " L" + fmt(ml) + " " + fmt(mt + ph) + " L" + fmt(ml + pw) +
           " " + fmt(mt + ph) + "\"/></g>\n";
    svg += "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"black\">\n";
    for (int i = 0; i <= 5; ++i) {
        const double e = max_err * i / 5.0;
        const double p = i / 5.0;
        svg += "<text x=\"" + fmt(px(e)) + "\" y=\"" + fmt(mt + ph + 18) +
               "\" text-anchor=\"middle\">" + fmt(std::round(e * 1000) / 1000) +
               "</text>\n";
        svg += "<text x=\"" + fmt(ml - 8) + "\" y=\"" + fmt(py(p) + 4) +
               "\" text-anchor=\"end\">" + fmt(p) + "</text>\n";
        svg += "<line x1=\"" + fmt(px(e)) + "\" y1=\"" + fmt(mt + ph) +
               "\" x2=\"" + fmt(px(e)) + "\" y2=\"" + fmt(mt + ph + 4) +
               "\" stroke=\"black\"/>\n";
        svg += "<line x1=\"" + fmt(ml - 4) + "\" y1=\"" + fmt(py(p)) +
               "\" x2=\"" + fmt(ml) + "\" y2=\"" + fmt(py(p)) +
               "\" stroke=\"black\"/>\n";
    }
    svg += "<text x=\"" + fmt(ml + pw / 2) + "\" y=\"" + fmt(h - 10) +
           "\" text-anchor=\"middle\">positioning error (m)</text>\n";
    svg += "<text x=\"16\" y=\"" + fmt(mt + ph / 2) +
           "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
           fmt(mt + ph / 2) + ")\">CDF</text>\n";
    svg += "</g>\n";

    int ci = 0;
    for (const Algorithm a : algos) {
        const auto errors = results.pooled_errors(a);
        if (errors.empty())
            continue;
        const auto cdf = error_cdf(errors);
        std::string pts = fmt(px(0)) + "," + fmt(py(0));
        for (const auto &[e, p] : cdf)
            pts += " " + fmt(px(e)) + "," + fmt(py(p));
        const char *color = colors[ci % 4];
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
        svg += "<g font-family=\"sans-serif\" font-size=\"12\"><rect x=\"" +
               fmt(ml + pw - 110) + "\" y=\"" + fmt(mt + 16 + 18 * ci) +
               "\" width=\"18\" height=\"3\" fill=\"" + color + "\"/><text x=\"" +
               fmt(ml + pw - 86) + "\" y=\"" + fmt(mt + 21 + 18 * ci) + "\">" +
               algorithm_name(a) + "</text></g>\n";
        ++ci;
    }
    svg += "</svg>\n";
    return svg;
}

std::vector<std::string> emit_outputs(const ResultSet &results,
                                      const std::string &out_dir,
                                      const std::vector<SweepRow> *sweep_rows) {
    if (results.entries.empty())
        throw std::invalid_argument("emit_outputs: empty results");
    std::filesystem::create_directories(out_dir);
    std::vector<std::string> written;
    auto write = [&](const std::string &name, const std::string &content) {
        const std::string path = out_dir + "/" + name;
        std::ofstream out(path);
        if (!out)
            throw std::runtime_error("cannot open for writing: " + path);
        out << content;
        written.push_back(path);
    };
    write("errors.csv", errors_csv(results));
    write("cdf.csv", cdf_csv(results));
    write("stats.csv", stats_csv(results));
    write("cdf.svg", cdf_svg(results));
    if (sweep_rows)
        write("timing.csv", timing_csv(*sweep_rows));
    return written;
}

} // namespace csiloc
