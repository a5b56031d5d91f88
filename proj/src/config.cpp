#include "niwalk/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace niwalk {

using nlohmann::json;
using nlohmann::ordered_json;

const char* to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::validate: return "validate";
        case ExperimentKind::survival: return "survival";
        case ExperimentKind::tuple: return "tuple";
        case ExperimentKind::pathspace: return "pathspace";
        case ExperimentKind::splitting: return "splitting";
        case ExperimentKind::mixing: return "mixing";
        case ExperimentKind::cone: return "cone";
    }
    return "?";
}

ExperimentKind experiment_kind_from(const std::string& name) {
    for (auto k : {ExperimentKind::validate, ExperimentKind::survival, ExperimentKind::tuple,
                   ExperimentKind::pathspace, ExperimentKind::splitting, ExperimentKind::mixing,
                   ExperimentKind::cone})
        if (name == to_string(k)) return k;
    throw data_error("config: unknown experiment kind '" + name + "'");
}

namespace {

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

/// Fails fast on unknown fields: silent typos in experiment configs corrupt
/// results.
void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const char* where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                ok = true;
                break;
            }
        if (!ok)
            throw data_error(std::string("config: unknown field '") + it.key() + "' in " +
                             where);
    }
}

const char* functional_name(MixingFunctional f) {
    switch (f) {
        case MixingFunctional::endpoint_angle: return "endpoint-angle";
        case MixingFunctional::sep_indicator: return "sep-indicator";
        case MixingFunctional::halfspace_fraction: return "halfspace-fraction";
    }
    return "?";
}

MixingFunctional functional_from(const std::string& name) {
    for (auto f : {MixingFunctional::endpoint_angle, MixingFunctional::sep_indicator,
                   MixingFunctional::halfspace_fraction})
        if (name == functional_name(f)) return f;
    throw data_error("config: unknown functional '" + name + "'");
}

ordered_json start_to_json(const StartConfig& s) {
    ordered_json j;
    j["kind"] = s.kind == InitialKind::diametric_lines ? "diametric" : "endpoints";
    j["base_radius"] = s.base_radius;
    j["min_base_radius"] = s.min_base_radius;
    j["angular_gap"] = s.angular_gap;
    return j;
}

StartConfig start_from_json(const json& j, const char* where) {
    check_keys(j, {"kind", "base_radius", "min_base_radius", "angular_gap"}, where);
    StartConfig s;
    std::string kind = j.value("kind", "diametric");
    if (kind == "diametric")
        s.kind = InitialKind::diametric_lines;
    else if (kind == "endpoints")
        s.kind = InitialKind::given_endpoints;
    else
        throw data_error("config: unknown start kind '" + kind + "'");
    s.base_radius = j.value("base_radius", 32.0);
    s.min_base_radius = j.value("min_base_radius", ShellConfig::kDefaultMinBaseRadius);
    s.angular_gap = j.value("angular_gap", 0.0);
    return s;
}

}  // namespace

std::string config_to_json(const ExperimentConfig& c) {
    ordered_json j;
    j["format"] = "niwalk-config";
    j["version"] = 1;
    j["experiment"] = to_string(c.kind);
    j["seed"] = c.seed;
    // threads and out_dir are execution parameters, not experiment identity;
    // results are independent of both, so the canonical form omits them
    switch (c.kind) {
        case ExperimentKind::validate: {
            ordered_json v;
            v["gambler_trials"] = c.validate.gambler_trials;
            v["ball_trials"] = c.validate.ball_trials;
            v["step6_draws"] = c.validate.step6_draws;
            v["cone_trials"] = c.validate.cone_trials;
            j["validate"] = std::move(v);
            break;
        }
        case ExperimentKind::survival:
        case ExperimentKind::tuple: {
            ordered_json v;
            if (c.kind == ExperimentKind::tuple) {
                v["group_m"] = c.survival.group_m;
                v["group_n"] = c.survival.group_n;
            }
            v["pairs"] = c.survival.pairs;
            v["max_steps"] = c.survival.max_steps;
            v["checkpoints"] = c.survival.checkpoints;
            v["h_lag"] = c.survival.h_lag;
            v["checkpoint_every_seconds"] = c.survival.checkpoint_every_seconds;
            j[to_string(c.kind)] = std::move(v);
            break;
        }
        case ExperimentKind::pathspace: {
            ordered_json v;
            v["start"] = start_to_json(c.pathspace.start);
            v["shells"] = c.pathspace.shells;
            v["trials"] = c.pathspace.trials;
            v["eval_sep"] = c.pathspace.eval_sep;
            j["pathspace"] = std::move(v);
            break;
        }
        case ExperimentKind::splitting: {
            ordered_json v;
            v["start"] = start_to_json(c.splitting.start);
            v["particles"] = c.splitting.particles;
            v["replicates"] = c.splitting.replicates;
            v["shells"] = c.splitting.shells;
            v["eval_sep"] = c.splitting.eval_sep;
            v["sep_relaxed_scale"] = c.splitting.sep_relaxed_scale;
            v["xi_window_lo"] = c.splitting.xi_window_lo;
            v["xi_window_hi"] = c.splitting.xi_window_hi;
            v["xi_ref"] = c.splitting.xi_ref;
            j["splitting"] = std::move(v);
            break;
        }
        case ExperimentKind::mixing: {
            ordered_json v;
            v["start_a"] = start_to_json(c.mixing.start_a);
            v["start_b"] = start_to_json(c.mixing.start_b);
            v["n_min"] = c.mixing.n_min;
            v["n_max"] = c.mixing.n_max;
            v["functional"] = functional_name(c.mixing.functional);
            v["particles"] = c.mixing.particles;
            v["replicates"] = c.mixing.replicates;
            j["mixing"] = std::move(v);
            break;
        }
        case ExperimentKind::cone: {
            ordered_json v;
            v["axis"] = {c.cone.axis_x, c.cone.axis_y, c.cone.axis_z};
            v["half_angle"] = c.cone.half_angle;
            v["shells"] = c.cone.shells;
            v["particles"] = c.cone.particles;
            v["replicates"] = c.cone.replicates;
            v["burn_in"] = c.cone.burn_in;
            v["step_eps"] = c.cone.step_eps;
            j["cone"] = std::move(v);
            break;
        }
    }
    return j.dump();
}

ExperimentConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw data_error(std::string("config: parse failure: ") + e.what());
    }
    if (!j.is_object()) throw data_error("config: expected a JSON object");
    check_keys(j,
               {"format", "version", "experiment", "seed", "validate", "survival", "tuple",
                "pathspace", "splitting", "mixing", "cone"},
               "top level");
    if (j.value("format", "niwalk-config") != "niwalk-config")
        throw data_error("config: wrong format tag");
    if (j.value("version", 1) != 1) throw data_error("config: unsupported version");
    ExperimentConfig c;
    if (!j.contains("experiment")) throw data_error("config: missing 'experiment'");
    c.kind = experiment_kind_from(j.at("experiment").get<std::string>());
    c.seed = j.value("seed", std::uint64_t{1});

    const char* section = to_string(c.kind);
    for (const char* s : {"validate", "survival", "tuple", "pathspace", "splitting", "mixing",
                          "cone"})
        if (j.contains(s) && std::string(s) != section)
            throw data_error(std::string("config: section '") + s +
                             "' does not match experiment kind");
    if (!j.contains(section)) return c;  // all defaults
    const json& v = j.at(section);

    switch (c.kind) {
        case ExperimentKind::validate:
            check_keys(v, {"gambler_trials", "ball_trials", "step6_draws", "cone_trials"},
                       section);
            c.validate.gambler_trials = v.value("gambler_trials", c.validate.gambler_trials);
            c.validate.ball_trials = v.value("ball_trials", c.validate.ball_trials);
            c.validate.step6_draws = v.value("step6_draws", c.validate.step6_draws);
            c.validate.cone_trials = v.value("cone_trials", c.validate.cone_trials);
            break;
        case ExperimentKind::survival:
        case ExperimentKind::tuple:
            check_keys(v,
                       {"group_m", "group_n", "pairs", "max_steps", "checkpoints", "h_lag",
                        "checkpoint_every_seconds"},
                       section);
            if (c.kind == ExperimentKind::survival && (v.contains("group_m") || v.contains("group_n")))
                throw data_error("config: group sizes belong to the tuple experiment");
            c.survival.group_m = v.value("group_m", 1u);
            c.survival.group_n = v.value("group_n", 1u);
            c.survival.pairs = v.value("pairs", c.survival.pairs);
            c.survival.max_steps = v.value("max_steps", c.survival.max_steps);
            if (v.contains("checkpoints"))
                c.survival.checkpoints = v.at("checkpoints").get<std::vector<std::uint64_t>>();
            c.survival.h_lag = v.value("h_lag", c.survival.h_lag);
            c.survival.checkpoint_every_seconds =
                v.value("checkpoint_every_seconds", c.survival.checkpoint_every_seconds);
            break;
        case ExperimentKind::pathspace:
            check_keys(v, {"start", "shells", "trials", "eval_sep"}, section);
            if (v.contains("start")) c.pathspace.start = start_from_json(v.at("start"), "start");
            c.pathspace.shells = v.value("shells", c.pathspace.shells);
            c.pathspace.trials = v.value("trials", c.pathspace.trials);
            c.pathspace.eval_sep = v.value("eval_sep", c.pathspace.eval_sep);
            break;
        case ExperimentKind::splitting:
            check_keys(v,
                       {"start", "particles", "replicates", "shells", "eval_sep",
                        "sep_relaxed_scale", "xi_window_lo", "xi_window_hi", "xi_ref"},
                       section);
            if (v.contains("start")) c.splitting.start = start_from_json(v.at("start"), "start");
            c.splitting.particles = v.value("particles", c.splitting.particles);
            c.splitting.replicates = v.value("replicates", c.splitting.replicates);
            c.splitting.shells = v.value("shells", c.splitting.shells);
            c.splitting.eval_sep = v.value("eval_sep", c.splitting.eval_sep);
            c.splitting.sep_relaxed_scale =
                v.value("sep_relaxed_scale", c.splitting.sep_relaxed_scale);
            c.splitting.xi_window_lo = v.value("xi_window_lo", c.splitting.xi_window_lo);
            c.splitting.xi_window_hi = v.value("xi_window_hi", c.splitting.xi_window_hi);
            c.splitting.xi_ref = v.value("xi_ref", c.splitting.xi_ref);
            break;
        case ExperimentKind::mixing:
            check_keys(v,
                       {"start_a", "start_b", "n_min", "n_max", "functional", "particles",
                        "replicates"},
                       section);
            if (v.contains("start_a")) c.mixing.start_a = start_from_json(v.at("start_a"), "start_a");
            if (v.contains("start_b")) c.mixing.start_b = start_from_json(v.at("start_b"), "start_b");
            c.mixing.n_min = v.value("n_min", c.mixing.n_min);
            c.mixing.n_max = v.value("n_max", c.mixing.n_max);
            if (v.contains("functional"))
                c.mixing.functional = functional_from(v.at("functional").get<std::string>());
            c.mixing.particles = v.value("particles", c.mixing.particles);
            c.mixing.replicates = v.value("replicates", c.mixing.replicates);
            break;
        case ExperimentKind::cone: {
            check_keys(v,
                       {"axis", "half_angle", "shells", "particles", "replicates", "burn_in",
                        "step_eps"},
                       section);
            if (v.contains("axis")) {
                auto a = v.at("axis");
                if (!a.is_array() || a.size() != 3)
                    throw data_error("config: cone axis must be a 3-vector");
                c.cone.axis_x = a.at(0).get<double>();
                c.cone.axis_y = a.at(1).get<double>();
                c.cone.axis_z = a.at(2).get<double>();
            }
            c.cone.half_angle = v.value("half_angle", c.cone.half_angle);
            c.cone.shells = v.value("shells", c.cone.shells);
            c.cone.particles = v.value("particles", c.cone.particles);
            c.cone.replicates = v.value("replicates", c.cone.replicates);
            c.cone.burn_in = v.value("burn_in", c.cone.burn_in);
            c.cone.step_eps = v.value("step_eps", c.cone.step_eps);
            break;
        }
    }
    return c;
}

std::uint64_t config_hash(const ExperimentConfig& config) {
    // FNV-1a over the canonical serialization
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : config_to_json(config)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string survival_csv(const SurvivalTable& table, const ExperimentConfig& config) {
    std::ostringstream out;
    out << "# niwalk-survival v1\n";
    out << "# version = " << kVersion << "\n";
    out << "# config = " << config_to_json(config) << "\n";
    out << "# seed = " << table.master_seed << "\n";
    out << "# pairs = " << table.total_pairs << "\n";
    out << "n,M_n,k,se_k,h,se_h\n";
    for (std::size_t i = 0; i < table.checkpoints.size(); ++i) {
        std::uint64_t n = table.checkpoints[i];
        out << n << ',' << table.counts[i] << ',';
        if (auto k = k_estimator(table, n)) {
            out << format_double(k->value) << ',' << format_double(k->se);
        } else {
            out << ',';
        }
        out << ',';
        if (auto h = h_estimator(table, n, table.h_lag)) {
            out << format_double(h->value) << ',' << format_double(h->se);
        } else {
            out << ',';
        }
        out << '\n';
    }
    return out.str();
}

SurvivalArtifact parse_survival_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "# niwalk-survival v1")
        throw data_error("survival artifact: missing magic header");
    SurvivalArtifact art;
    bool have_config = false;
    while (std::getline(in, line)) {
        if (line.rfind("# config = ", 0) == 0) {
            art.config = config_from_json(line.substr(11));
            have_config = true;
        } else if (line.rfind("#", 0) == 0) {
            continue;
        } else {
            break;  // header row
        }
    }
    if (!have_config) throw data_error("survival artifact: missing embedded config");
    if (line != "n,M_n,k,se_k,h,se_h")
        throw data_error("survival artifact: unexpected column header");
    SurvivalTable& t = art.table;
    t.master_seed = art.config.seed;
    t.group_m = art.config.survival.group_m;
    t.group_n = art.config.survival.group_n;
    t.total_pairs = art.config.survival.pairs;
    t.max_steps = art.config.survival.max_steps;
    t.h_lag = art.config.survival.h_lag;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string field;
        if (!std::getline(row, field, ',')) throw data_error("survival artifact: bad row");
        t.checkpoints.push_back(std::stoull(field));
        if (!std::getline(row, field, ','))
            throw data_error("survival artifact: row missing M_n for n=" + line);
        t.counts.push_back(std::stoull(field));
    }
    if (t.checkpoints.empty())
        throw data_error("survival artifact: no checkpoint rows");
    return art;
}

std::string checkpoint_to_json(const ExperimentConfig& config,
                               const ExperimentProgress& progress) {
    ordered_json j;
    j["format"] = "niwalk-checkpoint";
    j["version"] = 1;
    j["config"] = ordered_json::parse(config_to_json(config));
    j["config_hash"] = config_hash(config);
    j["cursor"] = progress.cursor;
    j["committed_counts"] = progress.committed_counts;
    return j.dump(2);
}

CheckpointFile checkpoint_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw data_error(std::string("checkpoint: parse failure: ") + e.what());
    }
    if (j.value("format", "") != "niwalk-checkpoint" || j.value("version", 0) != 1)
        throw data_error("checkpoint: wrong format or version");
    CheckpointFile f;
    f.config = config_from_json(j.at("config").dump());
    if (j.at("config_hash").get<std::uint64_t>() != config_hash(f.config))
        throw data_error("checkpoint: config hash mismatch");
    f.progress.cursor = j.at("cursor").get<std::uint64_t>();
    f.progress.committed_counts =
        j.at("committed_counts").get<std::vector<std::uint64_t>>();
    return f;
}

std::string write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw data_error("cannot open for writing: " + path.string());
    out << content;
    out.close();
    if (!out) throw data_error("write failed: " + path.string());
    return path.string();
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace niwalk
