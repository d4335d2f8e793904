#include "csiloc/fingerprint_db.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "csiloc/errors.hpp"

namespace csiloc {

using nlohmann::json;

namespace {
constexpr const char *kDbSchema = "csiloc.fingerprint_db";
constexpr int kDbVersion = 1;
} // namespace

std::vector<std::pair<double, double>> build_grid(const Rect &area,
                                                  double interval) {
    if (!(interval > 0.0))
        throw std::invalid_argument("build_grid: interval must be positive");
    if (!(area.width > 0.0) || !(area.height > 0.0))
        throw std::invalid_argument("build_grid: degenerate area");

    const int nx = static_cast<int>(std::floor(area.width / interval + 1e-9)) + 1;
    const int ny = static_cast<int>(std::floor(area.height / interval + 1e-9)) + 1;
    std::vector<std::pair<double, double>> pts;
    pts.reserve(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            pts.emplace_back(area.x0 + i * interval, area.y0 + j * interval);
    return pts;
}

void FingerprintBase::validate() const {
    if (coordinate.rows() != fingerprint.rows())
        throw SchemaError("fingerprint/coordinate row count mismatch");
    if (fingerprint.cols() != 4 * static_cast<long>(sn.size()))
        throw SchemaError("fingerprint must have 4 columns per AP");
    if (!(grid_interval > 0.0))
        throw SchemaError("grid_interval must be positive");
    std::set<std::pair<double, double>> seen;
    for (long i = 0; i < coordinate.rows(); ++i) {
        const double gx = (coordinate(i, 0) - grid_origin_x) / grid_interval;
        const double gy = (coordinate(i, 1) - grid_origin_y) / grid_interval;
        if (std::abs(gx - std::round(gx)) * grid_interval > 1e-9 ||
            std::abs(gy - std::round(gy)) * grid_interval > 1e-9)
            throw SchemaError("RP coordinate is off the declared grid");
        if (!seen.emplace(coordinate(i, 0), coordinate(i, 1)).second)
            throw SchemaError("duplicate RP coordinate");
    }
}

FingerprintBase assemble(const std::vector<std::pair<double, double>> &rps,
                         const std::vector<std::string> &aps,
                         const std::vector<std::vector<std::optional<MpFeature>>> &features,
                         double grid_interval, double grid_origin_x,
                         double grid_origin_y, const std::string &scenario_id,
                         std::vector<std::size_t> *dropped) {
    if (features.size() != rps.size())
        throw SchemaError("assemble: one feature row per RP required");
    const std::size_t n = aps.size();
    std::vector<std::size_t> valid;
    for (std::size_t i = 0; i < rps.size(); ++i) {
        if (features[i].size() != n)
            throw SchemaError("assemble: inconsistent AP sets across RPs");
        bool ok = true;
        for (const auto &f : features[i])
            ok = ok && f.has_value();
        if (ok)
            valid.push_back(i);
        else if (dropped)
            dropped->push_back(i);
    }

    FingerprintBase db;
    db.sn = aps;
    db.grid_interval = grid_interval;
    db.grid_origin_x = grid_origin_x;
    db.grid_origin_y = grid_origin_y;
    db.scenario_id = scenario_id;
    db.coordinate.resize(static_cast<long>(valid.size()), 2);
    db.fingerprint.resize(static_cast<long>(valid.size()), 4 * static_cast<long>(n));
    for (std::size_t row = 0; row < valid.size(); ++row) {
        const std::size_t i = valid[row];
        db.coordinate(static_cast<long>(row), 0) = rps[i].first;
        db.coordinate(static_cast<long>(row), 1) = rps[i].second;
        for (std::size_t a = 0; a < n; ++a) {
            const MpFeature &f = *features[i][a];
            const long c = 4 * static_cast<long>(a);
            db.fingerprint(static_cast<long>(row), c + 0) = f.rss;
            db.fingerprint(static_cast<long>(row), c + 1) = f.aaoa;
            db.fingerprint(static_cast<long>(row), c + 2) = f.eaoa;
            db.fingerprint(static_cast<long>(row), c + 3) = f.toa;
        }
    }
    db.validate();
    return db;
}

void split(const FingerprintBase &db, std::vector<std::pair<double, double>> &rps,
           std::vector<std::string> &aps,
           std::vector<std::vector<std::optional<MpFeature>>> &features) {
    rps.clear();
    features.clear();
    aps = db.sn;
    for (long i = 0; i < db.n_rps(); ++i) {
        rps.emplace_back(db.coordinate(i, 0), db.coordinate(i, 1));
        std::vector<std::optional<MpFeature>> row;
        for (int a = 0; a < db.n_aps(); ++a) {
            MpFeature f;
            f.rss = db.fingerprint(i, 4 * a + 0);
            f.aaoa = db.fingerprint(i, 4 * a + 1);
            f.eaoa = db.fingerprint(i, 4 * a + 2);
            f.toa = db.fingerprint(i, 4 * a + 3);
            row.emplace_back(f);
        }
        features.push_back(std::move(row));
    }
}

namespace {

json matrix_to_json(const Eigen::MatrixXd &m) {
    json rows = json::array();
    for (long i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (long j = 0; j < m.cols(); ++j)
            row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json &rows, long expect_cols = -1) {
    const long n = static_cast<long>(rows.size());
    long cols = expect_cols;
    if (cols < 0)
        cols = n > 0 ? static_cast<long>(rows.at(0).size()) : 0;
    Eigen::MatrixXd m(n, cols);
    for (long i = 0; i < n; ++i) {
        const json &row = rows.at(static_cast<std::size_t>(i));
        if (static_cast<long>(row.size()) != cols)
            throw LoadError("ragged matrix rows in database file");
        for (long j = 0; j < cols; ++j)
            m(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
    }
    return m;
}

} // namespace

void save(const FingerprintBase &db, const std::string &path) {
    json doc;
    doc["schema"] = kDbSchema;
    doc["version"] = kDbVersion;
    doc["scenario_id"] = db.scenario_id;
    doc["grid_interval"] = db.grid_interval;
    doc["grid_origin"] = {db.grid_origin_x, db.grid_origin_y};
    doc["sn"] = db.sn;
    doc["column_order"] = {"rss_dbm", "aaoa_deg", "eaoa_deg", "toa_ns"};
    doc["coordinate"] = matrix_to_json(db.coordinate);
    doc["fingerprint"] = matrix_to_json(db.fingerprint);
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    out << doc.dump(1, '\t') << "\n";
}

FingerprintBase load(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw LoadError("cannot open database file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception &e) {
        throw LoadError(std::string("malformed database file: ") + e.what());
    }
    try {
        if (doc.at("schema").get<std::string>() != kDbSchema)
            throw LoadError("not a fingerprint database file");
        const int version = doc.at("version").get<int>();
        if (version > kDbVersion)
            throw LoadError("database file version " + std::to_string(version) +
                            " is newer than supported version " +
                            std::to_string(kDbVersion));
        FingerprintBase db;
        db.scenario_id = doc.at("scenario_id").get<std::string>();
        db.grid_interval = doc.at("grid_interval").get<double>();
        db.grid_origin_x = doc.at("grid_origin").at(0).get<double>();
        db.grid_origin_y = doc.at("grid_origin").at(1).get<double>();
        db.sn = doc.at("sn").get<std::vector<std::string>>();
        db.coordinate = matrix_from_json(doc.at("coordinate"), 2);
        db.fingerprint =
            matrix_from_json(doc.at("fingerprint"), 4 * static_cast<long>(db.sn.size()));
        db.validate();
        return db;
    } catch (const json::exception &e) {
        throw LoadError(std::string("malformed database file: ") + e.what());
    }
}

std::string to_csv(const FingerprintBase &db) {
    std::string out = "x_m,y_m";
    for (const std::string &ap : db.sn)
        for (const char *col : {"rss_dbm", "aaoa_deg", "eaoa_deg", "toa_ns"})
            out += "," + ap + "_" + col;
    out += "\n";
    char buf[64];
    for (long i = 0; i < db.n_rps(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.9g,%.9g", db.coordinate(i, 0),
                      db.coordinate(i, 1));
        out += buf;
        for (long j = 0; j < db.fingerprint.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), ",%.9g", db.fingerprint(i, j));
            out += buf;
        }
        out += "\n";
    }
    return out;
}

} // namespace csiloc
