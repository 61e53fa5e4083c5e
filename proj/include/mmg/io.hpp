#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mmg/classifier.hpp"
#include "mmg/config.hpp"
#include "mmg/errors.hpp"
#include "mmg/fusion.hpp"
#include "mmg/manifest.hpp"
#include "mmg/probability.hpp"
#include "mmg/skeleton.hpp"
#include "mmg/tensor.hpp"

namespace mmg {

// ---------------------------------------------------------------------------
// Atomic file writes: content lands under a temp name in the target
// directory and is renamed into place, so readers never observe a partial
// file and interrupted runs leave no half-written outputs at final paths.

inline void atomic_write_bytes(const std::filesystem::path& path, const void* data,
                               std::size_t size) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!path.parent_path().empty()) fs::create_directories(path.parent_path(), ec);
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write: " + tmp.string());
        out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
        if (!out) throw IoError("short write: " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " +
                      ec.message());
    }
}

inline void atomic_write_text(const std::filesystem::path& path, const std::string& text) {
    atomic_write_bytes(path, text.data(), text.size());
}

inline std::string read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed: " + path.string());
    return bytes;
}

// ---------------------------------------------------------------------------
// Manifest (JSON lines; one header object, then one object per sample)

inline DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest: " + path.string());
    DatasetManifest m;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("manifest: ") + e.what(), lineno);
        }
        try {
            if (!have_header) {
                const auto cls = j.at("classes").get<std::int64_t>();
                if (cls < 1) throw ParseError("classes must be positive", lineno);
                m.class_count = static_cast<std::size_t>(cls);
                if (j.contains("splits")) {
                    m.split_names.clear();
                    for (const auto& s : j.at("splits"))
                        m.split_names.insert(s.get<std::string>());
                    if (m.split_names.empty())
                        throw ParseError("splits list must be non-empty", lineno);
                }
                have_header = true;
                continue;
            }
            SampleEntry e;
            e.id = j.at("id").get<std::string>();
            const auto label = j.at("label").get<std::int64_t>();
            if (label < 0)
                throw LabelRangeError("label " + std::to_string(label) + " of sample " + e.id +
                                      " outside [0," + std::to_string(m.class_count) + ")");
            e.label = static_cast<std::size_t>(label);
            e.split = j.at("split").get<std::string>();
            if (j.contains("paths"))
                for (const auto& [k, v] : j.at("paths").items())
                    e.modality_paths[k] = v.get<std::string>();
            m.entries.push_back(std::move(e));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("manifest: ") + e.what(), lineno);
        }
    }
    if (!have_header) throw ParseError("manifest has no header line");
    validate_manifest(m);
    return m;
}

inline void save_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
    validate_manifest(m);
    std::string out;
    nlohmann::json header;
    header["classes"] = m.class_count;
    header["splits"] = m.split_names;
    out += header.dump();
    out += '\n';
    for (const auto& e : m.entries) {
        nlohmann::json j;
        j["id"] = e.id;
        j["label"] = e.label;
        j["split"] = e.split;
        j["paths"] = e.modality_paths;
        out += j.dump();
        out += '\n';
    }
    atomic_write_text(path, out);
}

// ---------------------------------------------------------------------------
// Skeleton JSON: {"frames": [[[x,y,c], ...], ...]}. Missing coordinates may
// be encoded as null; anything non-finite sanitizes to a zero-confidence
// point so downstream maps treat it as an absent detection.

inline SkeletonSequence load_skeleton(const std::filesystem::path& path,
                                      std::size_t expected_keypoints) {
    if (expected_keypoints == 0) throw ValidationError("expected_keypoints must be positive");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file_bytes(path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("skeleton " + path.string() + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("frames") || !j["frames"].is_array())
        throw ParseError("skeleton " + path.string() + ": missing \"frames\" array");
    SkeletonSequence s;
    s.keypoint_count = expected_keypoints;
    s.frames.reserve(j["frames"].size());
    for (std::size_t t = 0; t < j["frames"].size(); ++t) {
        const auto& jf = j["frames"][t];
        if (!jf.is_array())
            throw ParseError("skeleton frame " + std::to_string(t) + " is not an array");
        if (jf.size() != expected_keypoints)
            throw ShapeError("skeleton frame " + std::to_string(t) + " has " +
                             std::to_string(jf.size()) + " keypoints, expected " +
                             std::to_string(expected_keypoints));
        std::vector<Keypoint> frame;
        frame.reserve(expected_keypoints);
        for (const auto& jk : jf) {
            if (!jk.is_array() || jk.size() != 3)
                throw ParseError("skeleton keypoint in frame " + std::to_string(t) +
                                 " is not an [x,y,c] triple");
            double v[3];
            for (std::size_t i = 0; i < 3; ++i) {
                if (jk[i].is_null())
                    v[i] = std::numeric_limits<double>::quiet_NaN();
                else if (jk[i].is_number())
                    v[i] = jk[i].get<double>();
                else
                    throw ParseError("non-numeric skeleton entry in frame " + std::to_string(t));
            }
            frame.push_back(sanitize_keypoint(Keypoint{v[0], v[1], v[2]}));
        }
        s.frames.push_back(std::move(frame));
    }
    return s;
}

inline void save_skeleton(const SkeletonSequence& s, const std::filesystem::path& path) {
    nlohmann::json frames = nlohmann::json::array();
    for (const auto& frame : s.frames) {
        nlohmann::json jf = nlohmann::json::array();
        for (const auto& kp : frame) jf.push_back({kp.x, kp.y, kp.c});
        frames.push_back(std::move(jf));
    }
    nlohmann::json j;
    j["frames"] = std::move(frames);
    atomic_write_text(path, j.dump() + "\n");
}

// ---------------------------------------------------------------------------
// RVID container: "RVID", version byte 1, u32le T,H,W,C, then T*H*W*C
// intensity bytes (t outermost, c innermost), byte b encoding b/255.

namespace detail {

inline void put_u32le(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline std::uint32_t get_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint64_t mul_checked(std::uint64_t a, std::uint64_t b, const char* what) {
    if (b != 0 && a > UINT64_MAX / b) throw ParseError(std::string(what) + ": size overflow");
    return a * b;
}

}  // namespace detail

inline void save_rvid(const VideoTensor& v, const std::filesystem::path& path) {
    if (v.frames < 1) throw ValidationError("rvid needs at least one frame");
    if (v.channels < 1) throw ValidationError("rvid needs at least one channel");
    validate_unit_range(v);
    constexpr std::uint64_t limit = UINT32_MAX;
    if (v.frames > limit || v.height > limit || v.width > limit || v.channels > limit)
        throw ValidationError("rvid dimension exceeds u32");
    std::string out;
    out.reserve(21 + v.size());
    out += "RVID";
    out.push_back(1);
    detail::put_u32le(out, static_cast<std::uint32_t>(v.frames));
    detail::put_u32le(out, static_cast<std::uint32_t>(v.height));
    detail::put_u32le(out, static_cast<std::uint32_t>(v.width));
    detail::put_u32le(out, static_cast<std::uint32_t>(v.channels));
    for (double x : v.values)
        out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(x * 255.0))));
    atomic_write_text(path, out);
}

inline VideoTensor load_rvid(const std::filesystem::path& path) {
    const std::string bytes = read_file_bytes(path);
    if (bytes.size() < 21) throw ParseError("rvid " + path.string() + ": truncated header");
    if (bytes.compare(0, 4, "RVID") != 0)
        throw FormatError("rvid " + path.string() + ": bad magic");
    if (static_cast<unsigned char>(bytes[4]) != 1)
        throw FormatError("rvid " + path.string() + ": unsupported version " +
                          std::to_string(static_cast<unsigned char>(bytes[4])));
    const unsigned char* p = reinterpret_cast<const unsigned char*>(bytes.data()) + 5;
    const std::uint32_t t = detail::get_u32le(p);
    const std::uint32_t h = detail::get_u32le(p + 4);
    const std::uint32_t w = detail::get_u32le(p + 8);
    const std::uint32_t c = detail::get_u32le(p + 12);
    std::uint64_t n = detail::mul_checked(t, h, "rvid");
    n = detail::mul_checked(n, w, "rvid");
    n = detail::mul_checked(n, c, "rvid");
    if (bytes.size() - 21 < n) throw ParseError("rvid " + path.string() + ": truncated payload");
    if (bytes.size() - 21 > n) throw ParseError("rvid " + path.string() + ": trailing bytes");
    if (t < 1 || h < 1 || w < 1 || c < 1)
        throw ParseError("rvid " + path.string() + ": zero dimension");
    VideoTensor v(t, h, w, c);
    const unsigned char* payload = reinterpret_cast<const unsigned char*>(bytes.data()) + 21;
    for (std::uint64_t i = 0; i < n; ++i)
        v.values[i] = static_cast<double>(payload[i]) / 255.0;
    return v;
}

// ---------------------------------------------------------------------------
// P6 PPM frame directories (frame_000000.ppm, frame_000001.ppm, ...)

namespace detail {

inline VideoTensor parse_ppm_frame(const std::string& bytes, const std::string& name) {
    std::size_t pos = 0;
    auto skip_space = [&] {
        while (pos < bytes.size()) {
            if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
                ++pos;
            } else if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else {
                break;
            }
        }
    };
    auto read_int = [&]() -> std::uint64_t {
        skip_space();
        if (pos >= bytes.size() || !std::isdigit(static_cast<unsigned char>(bytes[pos])))
            throw ParseError("ppm " + name + ": expected integer in header");
        std::uint64_t v = 0;
        while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
            v = v * 10 + static_cast<std::uint64_t>(bytes[pos] - '0');
            if (v > UINT32_MAX) throw ParseError("ppm " + name + ": header value overflow");
            ++pos;
        }
        return v;
    };
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6')
        throw FormatError("ppm " + name + ": not a P6 file");
    pos = 2;
    const std::uint64_t w = read_int();
    const std::uint64_t h = read_int();
    const std::uint64_t maxval = read_int();
    if (maxval != 255) throw FormatError("ppm " + name + ": maxval must be 255");
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
        throw ParseError("ppm " + name + ": missing separator after header");
    ++pos;
    const std::uint64_t need = mul_checked(mul_checked(w, h, "ppm"), 3, "ppm");
    if (bytes.size() - pos < need) throw ParseError("ppm " + name + ": truncated pixel data");
    VideoTensor v(1, h, w, 3);
    for (std::uint64_t i = 0; i < need; ++i)
        v.values[i] = static_cast<double>(static_cast<unsigned char>(bytes[pos + i])) / 255.0;
    return v;
}

}  // namespace detail

inline VideoTensor load_ppm_dir(const std::filesystem::path& dir) {
    std::vector<VideoTensor> frames;
    for (std::size_t i = 0;; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "frame_%06zu.ppm", i);
        const std::filesystem::path p = dir / name;
        if (!std::filesystem::exists(p)) break;
        frames.push_back(detail::parse_ppm_frame(read_file_bytes(p), name));
    }
    if (frames.empty()) throw IoError("no frame_000000.ppm under " + dir.string());
    VideoTensor out(frames.size(), frames[0].height, frames[0].width, 3);
    for (std::size_t t = 0; t < frames.size(); ++t) {
        if (frames[t].height != out.height || frames[t].width != out.width)
            throw ShapeError("ppm frame " + std::to_string(t) + " is " +
                             std::to_string(frames[t].width) + "x" +
                             std::to_string(frames[t].height) + ", frame 0 is " +
                             std::to_string(out.width) + "x" + std::to_string(out.height));
        std::copy(frames[t].values.begin(), frames[t].values.end(),
                  out.values.begin() + static_cast<std::ptrdiff_t>(t * frames[t].size()));
    }
    return out;
}

// Videos are RVID files or PPM frame directories and must carry 1 or 3
// channels; heatmap volumes go through load_rvid directly, which accepts any
// channel count.
inline VideoTensor load_video(const std::filesystem::path& path) {
    VideoTensor v =
        std::filesystem::is_directory(path) ? load_ppm_dir(path) : load_rvid(path);
    validate_video(v);
    return v;
}

inline void save_video(const VideoTensor& v, const std::filesystem::path& path) {
    validate_video(v);
    save_rvid(v, path);
}

// ---------------------------------------------------------------------------
// Probability CSV: "#mmgesture-probs v1 classes=<cls>" then
// "sample_id,p_0,...". Rows within the 1e-3 band renormalize to sum 1.

inline ProbabilityMatrix load_probs(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open probs file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw FormatError("probs " + path.string() + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string prefix = "#mmgesture-probs v1 classes=";
    if (line.rfind(prefix, 0) != 0)
        throw FormatError("probs " + path.string() + ": bad header \"" + line + "\"");
    char* end = nullptr;
    const unsigned long cls = std::strtoul(line.c_str() + prefix.size(), &end, 10);
    if (cls < 1 || end == line.c_str() + prefix.size() || *end != '\0')
        throw FormatError("probs " + path.string() + ": bad class count in header");

    ProbabilityMatrix p;
    p.class_count = cls;
    std::size_t lineno = 1;
    std::unordered_set<std::string> seen;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> tokens;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            tokens.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (tokens.size() != cls + 1)
            throw ParseError("probs row has " + std::to_string(tokens.size() - 1) +
                                 " values, expected " + std::to_string(cls),
                             lineno);
        if (tokens[0].empty()) throw ParseError("probs row has empty sample id", lineno);
        if (!seen.insert(tokens[0]).second)
            throw DuplicateSampleError("duplicate sample id: " + tokens[0]);
        double sum = 0.0;
        std::vector<double> row(cls);
        for (std::size_t j = 0; j < cls; ++j) {
            const std::string& tok = tokens[j + 1];
            char* tend = nullptr;
            const double v = std::strtod(tok.c_str(), &tend);
            if (tok.empty() || tend != tok.c_str() + tok.size())
                throw ParseError("bad probability \"" + tok + "\"", lineno);
            if (!std::isfinite(v))
                throw ValidationError("non-finite probability in row " + std::to_string(lineno));
            if (v < 0.0)
                throw ValidationError("negative probability in row " + std::to_string(lineno));
            row[j] = v;
            sum += v;
        }
        if (std::fabs(sum - 1.0) > 1e-3)
            throw NormalizationError("probs row " + std::to_string(lineno) + " sums to " +
                                     std::to_string(sum));
        for (double& v : row) v /= sum;
        p.sample_ids.push_back(tokens[0]);
        p.probs.insert(p.probs.end(), row.begin(), row.end());
    }
    if (p.rows() == 0) throw FormatError("probs " + path.string() + ": no rows");
    return p;
}

inline void save_probs(const ProbabilityMatrix& p, const std::filesystem::path& path) {
    validate_probability_matrix(p);
    std::string out = "#mmgesture-probs v1 classes=" + std::to_string(p.class_count) + "\n";
    char buf[40];
    for (std::size_t i = 0; i < p.rows(); ++i) {
        const std::string& id = p.sample_ids[i];
        if (id.find_first_of(",\n\r") != std::string::npos)
            throw ValidationError("sample id unsuitable for csv: " + id);
        out += id;
        for (double v : p.row(i)) {
            std::snprintf(buf, sizeof buf, ",%.9g", v);
            out += buf;
        }
        out += '\n';
    }
    atomic_write_text(path, out);
}

// ---------------------------------------------------------------------------
// Model, fusion weights, evaluation report, run config (JSON documents)

inline void save_model(const LinearModel& m, const std::filesystem::path& path) {
    validate_model(m);
    nlohmann::json j;
    j["d"] = m.dim;
    j["cls"] = m.class_count;
    j["weights"] = m.weights;
    j["bias"] = m.bias;
    j["pooling_spec"] = m.pooling_spec;
    atomic_write_text(path, j.dump(2) + "\n");
}

inline LinearModel load_model(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file_bytes(path));
        LinearModel m;
        m.dim = j.at("d").get<std::size_t>();
        m.class_count = j.at("cls").get<std::size_t>();
        m.weights = j.at("weights").get<std::vector<double>>();
        m.bias = j.at("bias").get<std::vector<double>>();
        m.pooling_spec = j.value("pooling_spec", std::string{});
        validate_model(m);
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("model " + path.string() + ": " + e.what());
    }
}

inline void save_weights(const FusionWeights& w, const std::filesystem::path& path) {
    validate_weights(w);
    nlohmann::json j;
    j["names"] = w.modality_names;
    j["w"] = w.w;
    atomic_write_text(path, j.dump(2) + "\n");
}

inline FusionWeights load_weights(const std::filesystem::path& path) {
    try {
        nlohmann::json j = nlohmann::json::parse(read_file_bytes(path));
        FusionWeights w;
        w.modality_names = j.at("names").get<std::vector<std::string>>();
        w.w = j.at("w").get<std::vector<double>>();
        validate_weights(w);
        return w;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("weights " + path.string() + ": " + e.what());
    }
}

inline nlohmann::json report_json(const EvalReport& r) {
    nlohmann::json j;
    j["top1"] = r.top1;
    j["n"] = r.n;
    j["class_count"] = r.class_count;
    j["per_class"] = r.per_class;
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t c = 0; c < r.class_count; ++c)
        rows.push_back(std::vector<std::size_t>(
            r.confusion.begin() + static_cast<std::ptrdiff_t>(c * r.class_count),
            r.confusion.begin() + static_cast<std::ptrdiff_t>((c + 1) * r.class_count)));
    j["confusion"] = std::move(rows);
    return j;
}

inline void save_report(const EvalReport& r, const std::filesystem::path& path) {
    atomic_write_text(path, report_json(r).dump(2) + "\n");
}

inline nlohmann::json config_json(const RunConfig& c) {
    nlohmann::json j;
    j["heatmap"]["sigma"] = c.heatmap.sigma;
    j["heatmap"]["out_h"] = c.heatmap.out_h;
    j["heatmap"]["out_w"] = c.heatmap.out_w;
    j["heatmap"]["subset"] = c.heatmap.subset;
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [a, b] : c.heatmap.edges) edges.push_back({a, b});
    j["heatmap"]["edges"] = std::move(edges);
    j["heatmap"]["truncate_3sigma"] = c.heatmap.truncate_3sigma;
    j["heatmap"]["crop_pad"] = c.heatmap.crop_pad;
    j["heatmap"]["crop_jitter"] = c.heatmap.crop_jitter;
    j["heatmap"]["crop_seed"] = c.heatmap.crop_seed;
    j["taylor"]["tau"] = c.taylor.tau;
    j["taylor"]["scales"] = c.taylor.scales;
    j["classifier"]["pooling"] = c.classifier.pooling;
    j["classifier"]["learning_rate"] = c.classifier.learning_rate;
    j["classifier"]["iterations"] = c.classifier.iterations;
    j["classifier"]["l2"] = c.classifier.l2;
    j["classifier"]["seed"] = c.classifier.seed;
    j["fusion"]["mode"] = c.fusion.mode;
    j["fusion"]["step"] = c.fusion.step;
    j["fusion"]["coarse_step"] = c.fusion.coarse_step;
    j["fusion"]["refine_step"] = c.fusion.refine_step;
    j["fusion"]["refine_radius"] = c.fusion.refine_radius;
    j["fusion"]["max_grid_points"] = c.fusion.max_grid_points;
    return j;
}

inline RunConfig config_from_json(const nlohmann::json& j) {
    RunConfig c;
    try {
        if (j.contains("heatmap")) {
            const auto& h = j.at("heatmap");
            c.heatmap.sigma = h.value("sigma", c.heatmap.sigma);
            c.heatmap.out_h = h.value("out_h", c.heatmap.out_h);
            c.heatmap.out_w = h.value("out_w", c.heatmap.out_w);
            if (h.contains("subset"))
                c.heatmap.subset = h.at("subset").get<std::vector<std::size_t>>();
            if (h.contains("edges")) {
                c.heatmap.edges.clear();
                for (const auto& e : h.at("edges")) {
                    if (!e.is_array() || e.size() != 2)
                        throw ValidationError("config edge must be a pair");
                    c.heatmap.edges.emplace_back(e[0].get<std::size_t>(),
                                                 e[1].get<std::size_t>());
                }
            }
            c.heatmap.truncate_3sigma = h.value("truncate_3sigma", c.heatmap.truncate_3sigma);
            c.heatmap.crop_pad = h.value("crop_pad", c.heatmap.crop_pad);
            c.heatmap.crop_jitter = h.value("crop_jitter", c.heatmap.crop_jitter);
            c.heatmap.crop_seed = h.value("crop_seed", c.heatmap.crop_seed);
        }
        if (j.contains("taylor")) {
            const auto& t = j.at("taylor");
            c.taylor.tau = t.value("tau", c.taylor.tau);
            if (t.contains("scales")) {
                const auto s = t.at("scales").get<std::vector<double>>();
                if (s.size() != 2) throw ValidationError("taylor scales must have 2 entries");
                c.taylor.scales = {s[0], s[1]};
            }
        }
        if (j.contains("classifier")) {
            const auto& k = j.at("classifier");
            c.classifier.pooling = k.value("pooling", c.classifier.pooling);
            c.classifier.learning_rate = k.value("learning_rate", c.classifier.learning_rate);
            c.classifier.iterations = k.value("iterations", c.classifier.iterations);
            c.classifier.l2 = k.value("l2", c.classifier.l2);
            c.classifier.seed = k.value("seed", c.classifier.seed);
        }
        if (j.contains("fusion")) {
            const auto& f = j.at("fusion");
            c.fusion.mode = f.value("mode", c.fusion.mode);
            c.fusion.step = f.value("step", c.fusion.step);
            c.fusion.coarse_step = f.value("coarse_step", c.fusion.coarse_step);
            c.fusion.refine_step = f.value("refine_step", c.fusion.refine_step);
            c.fusion.refine_radius = f.value("refine_radius", c.fusion.refine_radius);
            c.fusion.max_grid_points = f.value("max_grid_points", c.fusion.max_grid_points);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
    try {
        return config_from_json(nlohmann::json::parse(read_file_bytes(path)));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("config " + path.string() + ": " + e.what());
    }
}

inline void save_run_config(const RunConfig& c, const std::filesystem::path& path) {
    c.validate();
    atomic_write_text(path, config_json(c).dump(2) + "\n");
}

}  // namespace mmg
