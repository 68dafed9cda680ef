#include "sirs/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace sirs {

void ProblemConfig::validate() const {
    params.validate();
    if (!(horizon > 0.0) || !(step > 0.0)) throw ConfigError("horizon and step must be positive");
    if (!x0.valid()) throw ConfigError("initial state (s0, i0) must lie in D");
    if ((a0 | p0) & ~1) throw ConfigError("a0 and p0 must be 0 or 1");
    if (attack == AttackKind::Poisson && !(lambda >= 0.0))
        throw ConfigError("lambda must be >= 0");
    if (attack == AttackKind::Explicit && attack_csv.empty())
        throw ConfigError("attack=explicit needs attack_csv");
}

ProblemConfig scenario1() {
    ProblemConfig cfg;
    cfg.params = ModelParams{};  // scenario-1 rates are the defaults
    cfg.params.kappa = 0.03;
    cfg.params.c_protect = 0.05;
    cfg.costs.up = SwitchCostSpec::proportional(0.001, 1, 0);
    cfg.costs.down = SwitchCostSpec::proportional(0.001, 1, 1);
    cfg.attack = ProblemConfig::AttackKind::Constant;
    cfg.a0 = 1;
    cfg.p0 = 0;
    return cfg;
}

ProblemConfig scenario2() {
    ProblemConfig cfg;
    cfg.params.kappa = 0.02;
    cfg.params.c_protect = 0.04;
    cfg.costs.up = SwitchCostSpec::proportional(0.01, std::nullopt, 0);
    cfg.costs.down = SwitchCostSpec::proportional(0.001, std::nullopt, 0);
    cfg.attack = ProblemConfig::AttackKind::Poisson;
    cfg.lambda = 0.1;
    cfg.a0 = 1;
    cfg.p0 = 0;
    return cfg;
}

namespace {

const std::set<std::string> kModelKeys = {"beta", "gamma", "rho",      "nu",  "kappa",
                                          "sigma", "delta", "c_i",      "c_v", "g01",
                                          "g10",   "g01_mode", "g10_mode"};
const std::set<std::string> kOtherKeys = {"horizon", "step",   "s0",   "i0",        "a0",
                                          "p0",      "seed",   "attack", "lambda",
                                          "attack_csv"};

double parse_number(const std::string& value, const std::string& key, int line) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(value, &used);
    } catch (const std::exception&) {
        throw ConfigError("key `" + key + "` needs a number, got `" + value + "`", line);
    }
    if (used != value.size())
        throw ConfigError("trailing characters after number for key `" + key + "`", line);
    return x;
}

int parse_binary(const std::string& value, const std::string& key, int line) {
    if (value == "0") return 0;
    if (value == "1") return 1;
    throw ConfigError("key `" + key + "` must be 0 or 1", line);
}

/// Switching cost mode grammar: `constant` or `prop:XY` where X is the
/// referenced attack level ('0', '1', or 'a' for the current one) and Y
/// the referenced protection level.
SwitchCostSpec parse_cost(const std::string& mode, double amount, const std::string& key,
                          int line) {
    if (mode == "constant") {
        if (!(amount > 0.0))
            throw ConfigError("constant switching cost `" + key + "` must be positive", line);
        return SwitchCostSpec::constant(amount);
    }
    if (mode.rfind("prop:", 0) == 0 && mode.size() == 7) {
        const char a = mode[5];
        const char p = mode[6];
        std::optional<int> ref_a;
        if (a == '0') ref_a = 0;
        else if (a == '1') ref_a = 1;
        else if (a != 'a')
            throw ConfigError("bad reference attack level in `" + mode + "`", line);
        if (p != '0' && p != '1')
            throw ConfigError("bad reference protection level in `" + mode + "`", line);
        try {
            return SwitchCostSpec::proportional(amount, ref_a, p - '0');
        } catch (const std::exception& e) {
            throw ConfigError(std::string(e.what()) + " (key `" + key + "`)", line);
        }
    }
    throw ConfigError("unknown switching cost mode `" + mode + "` (want `constant` or `prop:XY`)",
                      line);
}

std::string format_cost_mode(const SwitchCostSpec& spec) {
    if (spec.kind == SwitchCostSpec::Kind::Constant) return "constant";
    std::string mode = "prop:";
    mode += spec.ref_attack ? static_cast<char>('0' + *spec.ref_attack) : 'a';
    mode += static_cast<char>('0' + spec.ref_protect);
    return mode;
}

std::string num(double x) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace

ProblemConfig parse_config_text(const std::string& text, const ProblemConfig& base,
                                bool require_model_keys) {
    ProblemConfig cfg = base;
    std::map<std::string, std::pair<std::string, int>> kv;

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto strip = [](std::string s) {
            s.erase(0, s.find_first_not_of(" \t\r"));
            s.erase(s.find_last_not_of(" \t\r") + 1);
            return s;
        };
        if (strip(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected `key = value`, got `" + strip(line) + "`", line_no);
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        if (!kModelKeys.count(key) && !kOtherKeys.count(key))
            throw ConfigError("unknown key `" + key + "`", line_no);
        if (kv.count(key)) throw ConfigError("duplicate key `" + key + "`", line_no);
        if (value.empty()) throw ConfigError("empty value for key `" + key + "`", line_no);
        kv[key] = {value, line_no};
    }

    if (require_model_keys) {
        for (const auto& key : kModelKeys) {
            if (key == "g01_mode" || key == "g10_mode") continue;  // default: constant
            if (!kv.count(key)) throw ConfigError("missing key `" + key + "`");
        }
    }

    const auto take = [&](const std::string& key) -> std::optional<std::pair<std::string, int>> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        auto out = it->second;
        kv.erase(it);
        return out;
    };
    const auto number = [&](const std::string& key, double& slot) {
        if (auto v = take(key)) slot = parse_number(v->first, key, v->second);
    };

    number("beta", cfg.params.beta);
    number("gamma", cfg.params.gamma);
    number("rho", cfg.params.rho);
    number("nu", cfg.params.nu);
    number("kappa", cfg.params.kappa);
    number("sigma", cfg.params.sigma);
    number("delta", cfg.params.delta);
    number("c_i", cfg.params.c_infect);
    number("c_v", cfg.params.c_protect);

    // Cost pairs: the mode defaults to `constant` whenever an amount is
    // given without one.
    for (const auto& [amount_key, mode_key, slot] :
         {std::tuple<const char*, const char*, SwitchCostSpec*>{"g01", "g01_mode", &cfg.costs.up},
          {"g10", "g10_mode", &cfg.costs.down}}) {
        auto amount = take(amount_key);
        auto mode = take(mode_key);
        if (!amount && !mode) continue;
        if (!amount)
            throw ConfigError("key `" + std::string(mode_key) + "` needs `" + amount_key + "`",
                              mode->second);
        const double g = parse_number(amount->first, amount_key, amount->second);
        const std::string mode_str = mode ? mode->first : "constant";
        *slot = parse_cost(mode_str, g, amount_key, mode ? mode->second : amount->second);
    }

    number("horizon", cfg.horizon);
    number("step", cfg.step);
    number("lambda", cfg.lambda);
    if (auto v = take("s0")) cfg.x0.s = parse_number(v->first, "s0", v->second);
    if (auto v = take("i0")) cfg.x0.i = parse_number(v->first, "i0", v->second);
    if (auto v = take("a0")) cfg.a0 = parse_binary(v->first, "a0", v->second);
    if (auto v = take("p0")) cfg.p0 = parse_binary(v->first, "p0", v->second);
    if (auto v = take("seed")) {
        try {
            cfg.seed = std::stoull(v->first);
        } catch (const std::exception&) {
            throw ConfigError("key `seed` needs an unsigned integer", v->second);
        }
    }
    if (auto v = take("attack")) {
        if (v->first == "constant") cfg.attack = ProblemConfig::AttackKind::Constant;
        else if (v->first == "poisson") cfg.attack = ProblemConfig::AttackKind::Poisson;
        else if (v->first == "explicit") cfg.attack = ProblemConfig::AttackKind::Explicit;
        else
            throw ConfigError("key `attack` must be constant, poisson, or explicit", v->second);
    }
    if (auto v = take("attack_csv")) cfg.attack_csv = v->first;

    try {
        cfg.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

ProblemConfig parse_config_file(const std::string& path, const ProblemConfig& base,
                                bool require_model_keys) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str(), base, require_model_keys);
}

std::string canonical_config_text(const ProblemConfig& cfg) {
    std::ostringstream out;
    out << "beta = " << num(cfg.params.beta) << "\n";
    out << "gamma = " << num(cfg.params.gamma) << "\n";
    out << "rho = " << num(cfg.params.rho) << "\n";
    out << "nu = " << num(cfg.params.nu) << "\n";
    out << "kappa = " << num(cfg.params.kappa) << "\n";
    out << "sigma = " << num(cfg.params.sigma) << "\n";
    out << "delta = " << num(cfg.params.delta) << "\n";
    out << "c_i = " << num(cfg.params.c_infect) << "\n";
    out << "c_v = " << num(cfg.params.c_protect) << "\n";
    out << "g01 = " << num(cfg.costs.up.amount) << "\n";
    out << "g01_mode = " << format_cost_mode(cfg.costs.up) << "\n";
    out << "g10 = " << num(cfg.costs.down.amount) << "\n";
    out << "g10_mode = " << format_cost_mode(cfg.costs.down) << "\n";
    out << "horizon = " << num(cfg.horizon) << "\n";
    out << "step = " << num(cfg.step) << "\n";
    out << "s0 = " << num(cfg.x0.s) << "\n";
    out << "i0 = " << num(cfg.x0.i) << "\n";
    out << "a0 = " << cfg.a0 << "\n";
    out << "p0 = " << cfg.p0 << "\n";
    out << "seed = " << cfg.seed << "\n";
    switch (cfg.attack) {
        case ProblemConfig::AttackKind::Constant: out << "attack = constant\n"; break;
        case ProblemConfig::AttackKind::Poisson:
            out << "attack = poisson\nlambda = " << num(cfg.lambda) << "\n";
            break;
        case ProblemConfig::AttackKind::Explicit:
            out << "attack = explicit\nattack_csv = " << cfg.attack_csv << "\n";
            break;
    }
    return out.str();
}

std::string params_hash(const ModelParams& params, const SwitchCosts& costs) {
    std::ostringstream canon;
    canon << num(params.beta) << ';' << num(params.gamma) << ';' << num(params.rho) << ';'
          << num(params.nu) << ';' << num(params.kappa) << ';' << num(params.sigma) << ';'
          << num(params.delta) << ';' << num(params.c_infect) << ';' << num(params.c_protect);
    for (const SwitchCostSpec* spec : {&costs.up, &costs.down}) {
        canon << ';' << (spec->kind == SwitchCostSpec::Kind::Constant ? 'c' : 'p')
              << num(spec->amount) << ':' << format_cost_mode(*spec);
    }
    const std::string text = canon.str();
    std::uint64_t hash = 0xCBF29CE484222325ULL;  // FNV-1a
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001B3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

}  // namespace sirs
