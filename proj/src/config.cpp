#include "dde/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "dde/bandit.hpp"
#include "dde/csv.hpp"
#include "dde/errors.hpp"

namespace dde {

ExperimentConfig::ExperimentConfig() { bandit.actions = default_bandit_actions(); }

std::size_t latent_dim_for_arm(std::size_t n_joints) {
    if (n_joints == 20) return 10;
    if (n_joints == 200 || n_joints == 1000) return 32;
    return n_joints < 200 ? std::min<std::size_t>(10, n_joints) : 32;
}

ExperimentConfig ExperimentConfig::for_arm(std::size_t n_joints) {
    ExperimentConfig cfg;
    cfg.domain.n_joints = n_joints;
    cfg.vae.latent_dim = latent_dim_for_arm(n_joints);
    return cfg;
}

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& m) { throw ConfigError(m); };
    if (domain.n_joints == 0) fail("domain.n_joints must be positive");
    if (!(domain.angles.lower < domain.angles.upper)) fail("domain.angle_lower must be below domain.angle_upper");
    if (archive.bins == 0) fail("archive.bins must be positive");
    try {
        operators.validate();
    } catch (const std::invalid_argument& e) {
        fail(std::string("operators: ") + e.what());
    }
    if (vae.latent_dim == 0 || vae.hidden_dim == 0) fail("vae dimensions must be positive");
    if (vae.train_interval == 0) fail("vae.train_interval must be positive");
    if (!(vae.train.learning_rate > 0.0)) fail("vae.learning_rate must be positive");
    if (vae.train.batch_size == 0) fail("vae.batch_size must be positive");
    if (bandit.actions.empty()) fail("bandit.actions must not be empty");
    for (const auto& a : bandit.actions) {
        try {
            a.validate();
        } catch (const std::invalid_argument& e) {
            fail(std::string("bandit.actions: ") + e.what());
        }
    }
    if (bandit.window == 0) fail("bandit.window must be positive");
    if (run.batch == 0) fail("run.batch must be positive");
    if (run.budget < run.batch) fail("run.budget must cover at least one batch");
    if (run.replicates == 0) fail("run.replicates must be positive");
    if (targets.budget_per_target == 0) fail("targets.budget_per_target must be positive");
    if (!(targets.step_size > 0.0)) fail("targets.step_size must be positive");
}

std::string format_actions(const std::vector<OperatorRatios>& actions) {
    std::string out;
    for (std::size_t i = 0; i < actions.size(); ++i) {
        if (i) out += ",";
        out += csv::format(actions[i].xover) + ":" + csv::format(actions[i].line) + ":" + csv::format(actions[i].iso);
    }
    return out;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used == v.size()) return d;
    } catch (const std::exception&) {
    }
    throw ConfigError(key + ": expected a number, got '" + v + "'");
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
    return out;
}

struct Field {
    const char* key;
    std::function<std::string(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, const std::string&)> set;
};

template <class T>
Field size_field(const char* key, T ExperimentConfig::*group, std::size_t T::*member) {
    return {key, [=](const ExperimentConfig& c) { return std::to_string(c.*group.*member); },
            [=](ExperimentConfig& c, const std::string& v) { c.*group.*member = parse_uint(key, v); }};
}

template <class T>
Field double_field(const char* key, T ExperimentConfig::*group, double T::*member) {
    return {key, [=](const ExperimentConfig& c) { return csv::format(c.*group.*member); },
            [=](ExperimentConfig& c, const std::string& v) { c.*group.*member = parse_double(key, v); }};
}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = [] {
        using C = ExperimentConfig;
        std::vector<Field> f;
        f.push_back(size_field("domain.n_joints", &C::domain, &DomainConfig::n_joints));
        f.push_back({"domain.angle_lower", [](const C& c) { return csv::format(c.domain.angles.lower); },
                     [](C& c, const std::string& v) { c.domain.angles.lower = parse_double("domain.angle_lower", v); }});
        f.push_back({"domain.angle_upper", [](const C& c) { return csv::format(c.domain.angles.upper); },
                     [](C& c, const std::string& v) { c.domain.angles.upper = parse_double("domain.angle_upper", v); }});
        f.push_back(size_field("archive.bins", &C::archive, &ArchiveConfig::bins));
        f.push_back({"archive.centroid_seed", [](const C& c) { return std::to_string(c.archive.centroid_seed); },
                     [](C& c, const std::string& v) { c.archive.centroid_seed = parse_uint("archive.centroid_seed", v); }});
        f.push_back({"archive.layout", [](const C& c) { return std::string(to_string(c.archive.layout)); },
                     [](C& c, const std::string& v) { c.archive.layout = parse_layout(v); }});
        f.push_back(double_field("operators.sigma_iso", &C::operators, &VariationConfig::sigma_iso));
        f.push_back(double_field("operators.sigma_line_1", &C::operators, &VariationConfig::sigma_line_1));
        f.push_back(double_field("operators.sigma_line_2", &C::operators, &VariationConfig::sigma_line_2));
        f.push_back(double_field("operators.sigma_latent", &C::operators, &VariationConfig::sigma_latent));
        f.push_back(size_field("vae.latent_dim", &C::vae, &VaeConfig::latent_dim));
        f.push_back(size_field("vae.hidden_dim", &C::vae, &VaeConfig::hidden_dim));
        f.push_back(size_field("vae.epochs", &C::vae, &VaeConfig::epochs));
        f.push_back(size_field("vae.train_interval", &C::vae, &VaeConfig::train_interval));
        f.push_back({"vae.learning_rate", [](const C& c) { return csv::format(c.vae.train.learning_rate); },
                     [](C& c, const std::string& v) { c.vae.train.learning_rate = parse_double("vae.learning_rate", v); }});
        f.push_back({"vae.beta1", [](const C& c) { return csv::format(c.vae.train.beta1); },
                     [](C& c, const std::string& v) { c.vae.train.beta1 = parse_double("vae.beta1", v); }});
        f.push_back({"vae.beta2", [](const C& c) { return csv::format(c.vae.train.beta2); },
                     [](C& c, const std::string& v) { c.vae.train.beta2 = parse_double("vae.beta2", v); }});
        f.push_back({"vae.adam_eps", [](const C& c) { return csv::format(c.vae.train.adam_eps); },
                     [](C& c, const std::string& v) { c.vae.train.adam_eps = parse_double("vae.adam_eps", v); }});
        f.push_back({"vae.batch_size", [](const C& c) { return std::to_string(c.vae.train.batch_size); },
                     [](C& c, const std::string& v) { c.vae.train.batch_size = parse_uint("vae.batch_size", v); }});
        f.push_back({"vae.kl_weight", [](const C& c) { return csv::format(c.vae.train.kl_weight); },
                     [](C& c, const std::string& v) { c.vae.train.kl_weight = parse_double("vae.kl_weight", v); }});
        f.push_back({"bandit.actions", [](const C& c) { return format_actions(c.bandit.actions); },
                     [](C& c, const std::string& v) { c.bandit.actions = parse_actions(v); }});
        f.push_back(size_field("bandit.window", &C::bandit, &BanditConfig::window));
        f.push_back(size_field("run.batch", &C::run, &RunConfig::batch));
        f.push_back(size_field("run.budget", &C::run, &RunConfig::budget));
        f.push_back({"run.seed", [](const C& c) { return std::to_string(c.run.seed); },
                     [](C& c, const std::string& v) { c.run.seed = parse_uint("run.seed", v); }});
        f.push_back(size_field("run.replicates", &C::run, &RunConfig::replicates));
        f.push_back({"run.threads", [](const C& c) { return std::to_string(c.run.threads); },
                     [](C& c, const std::string& v) { c.run.threads = static_cast<unsigned>(parse_uint("run.threads", v)); }});
        f.push_back({"run.out", [](const C& c) { return c.run.out; },
                     [](C& c, const std::string& v) { c.run.out = v; }});
        f.push_back(size_field("run.recreate_budget", &C::run, &RunConfig::recreate_budget));
        f.push_back(size_field("targets.budget_per_target", &C::targets, &TargetsConfig::budget_per_target));
        f.push_back(double_field("targets.step_size", &C::targets, &TargetsConfig::step_size));
        return f;
    }();
    return table;
}

}  // namespace

std::vector<OperatorRatios> parse_actions(const std::string& text) {
    std::vector<OperatorRatios> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        const auto a = item.find(':');
        const auto b = a == std::string::npos ? a : item.find(':', a + 1);
        if (b == std::string::npos) throw ConfigError("bandit.actions: expected xover:line:iso, got '" + item + "'");
        OperatorRatios r{parse_double("bandit.actions", trim(item.substr(0, a))),
                         parse_double("bandit.actions", trim(item.substr(a + 1, b - a - 1))),
                         parse_double("bandit.actions", trim(item.substr(b + 1)))};
        try {
            r.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError("bandit.actions: '" + item + "': " + e.what());
        }
        out.push_back(r);
    }
    if (out.empty()) throw ConfigError("bandit.actions: no actions given");
    return out;
}

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    for (const auto& f : fields()) {
        if (key == f.key) {
            f.set(cfg, value);
            return;
        }
    }
    throw ConfigError("unknown configuration key '" + key + "'");
}

std::string to_text(const ExperimentConfig& cfg) {
    std::string out;
    for (const auto& f : fields()) out += std::string(f.key) + " = " + f.get(cfg) + "\n";
    return out;
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    bool latent_given = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        apply_setting(cfg, key, trim(line.substr(eq + 1)));
        latent_given = latent_given || key == "vae.latent_dim";
    }
    if (!latent_given) cfg.vae.latent_dim = latent_dim_for_arm(cfg.domain.n_joints);
    return cfg;
}

void save_config(const std::filesystem::path& path, const ExperimentConfig& cfg) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << to_text(cfg);
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace dde
