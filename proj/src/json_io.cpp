#include "csiloc/json_io.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "csiloc/errors.hpp"

namespace csiloc {

using nlohmann::json;

namespace {

constexpr const char *kPathsSchema = "csiloc.paths";
constexpr const char *kCsiSchema = "csiloc.csi";
constexpr const char *kTestsetSchema = "csiloc.testset";
constexpr int kVersion = 1;

json vec3_to_json(const Vec3 &v) { return {v.x, v.y, v.z}; }
Vec3 vec3_from_json(const json &j) {
    return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

json cplx_to_json(const std::complex<double> &c) { return {c.real(), c.imag()}; }
std::complex<double> cplx_from_json(const json &j) {
    return {j.at(0).get<double>(), j.at(1).get<double>()};
}

PathKind kind_from_string(const std::string &s) {
    if (s == "los")
        return PathKind::LoS;
    if (s == "reflection")
        return PathKind::Reflection;
    if (s == "scattering")
        return PathKind::Scattering;
    if (s == "diffraction")
        return PathKind::Diffraction;
    throw LoadError("unknown path kind: " + s);
}

json read_doc(const std::string &path, const char *schema) {
    std::ifstream in(path);
    if (!in)
        throw LoadError("cannot open file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception &e) {
        throw LoadError(std::string("malformed JSON document: ") + e.what());
    }
    if (!doc.contains("schema") || doc["schema"] != schema)
        throw LoadError(std::string("expected schema ") + schema);
    const int version = doc.at("version").get<int>();
    if (version > kVersion)
        throw LoadError("document version " + std::to_string(version) +
                        " is newer than supported version " +
                        std::to_string(kVersion));
    return doc;
}

void write_doc(const json &doc, const std::string &path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    out << doc.dump() << "\n";
}

} // namespace

void save_paths(const std::vector<LinkPaths> &links, const std::string &path) {
    json doc;
    doc["schema"] = kPathsSchema;
    doc["version"] = kVersion;
    json jlinks = json::array();
    for (const LinkPaths &l : links) {
        json jpaths = json::array();
        for (const PathComponent &p : l.paths) {
            json jp;
            jp["kind"] = to_string(p.kind);
            jp["order"] = p.order;
            jp["gain"] = cplx_to_json(p.gain);
            jp["delay"] = p.delay;
            jp["aaoa"] = p.aaoa;
            jp["eaoa"] = p.eaoa;
            jp["power_dbm"] = p.power_dbm;
            json pts = json::array();
            for (const Vec3 &v : p.interaction_points)
                pts.push_back(vec3_to_json(v));
            jp["points"] = std::move(pts);
            jpaths.push_back(std::move(jp));
        }
        jlinks.push_back({{"tx", vec3_to_json(l.tx)},
                          {"rx", vec3_to_json(l.rx)},
                          {"ap_id", l.ap_id},
                          {"paths", std::move(jpaths)}});
    }
    doc["links"] = std::move(jlinks);
    write_doc(doc, path);
}

std::vector<LinkPaths> load_paths(const std::string &path) {
    const json doc = read_doc(path, kPathsSchema);
    std::vector<LinkPaths> out;
    try {
        for (const json &jl : doc.at("links")) {
            LinkPaths l;
            l.tx = vec3_from_json(jl.at("tx"));
            l.rx = vec3_from_json(jl.at("rx"));
            l.ap_id = jl.at("ap_id").get<std::string>();
            for (const json &jp : jl.at("paths")) {
                PathComponent p;
                p.kind = kind_from_string(jp.at("kind").get<std::string>());
                p.order = jp.at("order").get<int>();
                p.gain = cplx_from_json(jp.at("gain"));
                p.delay = jp.at("delay").get<double>();
                p.aaoa = jp.at("aaoa").get<double>();
                p.eaoa = jp.at("eaoa").get<double>();
                p.power_dbm = jp.at("power_dbm").get<double>();
                for (const json &pt : jp.at("points"))
                    p.interaction_points.push_back(vec3_from_json(pt));
                l.paths.push_back(std::move(p));
            }
            out.push_back(std::move(l));
        }
    } catch (const json::exception &e) {
        throw LoadError(std::string("malformed paths document: ") + e.what());
    }
    return out;
}

void save_snapshots(const std::vector<CsiSnapshot> &snaps, const std::string &path) {
    json doc;
    doc["schema"] = kCsiSchema;
    doc["version"] = kVersion;
    json jsnaps = json::array();
    for (const CsiSnapshot &s : snaps) {
        json rows = json::array();
        for (Eigen::Index k = 0; k < s.h.rows(); ++k) {
            json row = json::array();
            for (Eigen::Index m = 0; m < s.h.cols(); ++m)
                row.push_back(cplx_to_json(s.h(k, m)));
            rows.push_back(std::move(row));
        }
        jsnaps.push_back({{"tx", vec3_to_json(s.tx_position)},
                          {"ap_id", s.ap_id},
                          {"array_rows", s.array_rows},
                          {"array_cols", s.array_cols},
                          {"noise_var", s.noise_var},
                          {"h", std::move(rows)}});
    }
    doc["snapshots"] = std::move(jsnaps);
    write_doc(doc, path);
}

std::vector<CsiSnapshot> load_snapshots(const std::string &path) {
    const json doc = read_doc(path, kCsiSchema);
    std::vector<CsiSnapshot> out;
    try {
        for (const json &js : doc.at("snapshots")) {
            CsiSnapshot s;
            s.tx_position = vec3_from_json(js.at("tx"));
            s.ap_id = js.at("ap_id").get<std::string>();
            s.array_rows = js.at("array_rows").get<int>();
            s.array_cols = js.at("array_cols").get<int>();
            s.noise_var = js.at("noise_var").get<double>();
            const json &rows = js.at("h");
            const long nk = static_cast<long>(rows.size());
            const long nm = nk > 0 ? static_cast<long>(rows.at(0).size()) : 0;
            s.h.resize(nk, nm);
            for (long k = 0; k < nk; ++k) {
                const json &row = rows.at(static_cast<std::size_t>(k));
                if (static_cast<long>(row.size()) != nm)
                    throw LoadError("ragged CSI matrix");
                for (long m = 0; m < nm; ++m)
                    s.h(k, m) = cplx_from_json(row.at(static_cast<std::size_t>(m)));
            }
            out.push_back(std::move(s));
        }
    } catch (const json::exception &e) {
        throw LoadError(std::string("malformed CSI document: ") + e.what());
    }
    return out;
}

void save_testset(const std::vector<TestRecord> &records, const std::string &path) {
    json doc;
    doc["schema"] = kTestsetSchema;
    doc["version"] = kVersion;
    json recs = json::array();
    for (const TestRecord &r : records) {
        json features = json::array();
        for (long i = 0; i < r.features.size(); ++i)
            features.push_back(r.features(i));
        recs.push_back({{"true_position", {r.true_x, r.true_y}},
                        {"features", std::move(features)}});
    }
    doc["records"] = std::move(recs);
    write_doc(doc, path);
}

std::vector<TestRecord> load_testset(const std::string &path) {
    const json doc = read_doc(path, kTestsetSchema);
    std::vector<TestRecord> out;
    try {
        for (const json &jr : doc.at("records")) {
            TestRecord r;
            r.true_x = jr.at("true_position").at(0).get<double>();
            r.true_y = jr.at("true_position").at(1).get<double>();
            const json &features = jr.at("features");
            r.features.resize(static_cast<long>(features.size()));
            for (long i = 0; i < r.features.size(); ++i)
                r.features(i) = features.at(static_cast<std::size_t>(i)).get<double>();
            out.push_back(std::move(r));
        }
    } catch (const json::exception &e) {
        throw LoadError(std::string("malformed test set document: ") + e.what());
    }
    return out;
}

} // namespace csiloc
