#include "dgparam/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "dgparam/errors.hpp"
#include "dgparam/io.hpp"

namespace dgparam {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double to_number(const std::string& text, const std::string& where) {
    const std::string t = trim(text);
    if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
    if (t == "-inf") return -std::numeric_limits<double>::infinity();
    double value = 0.0;
    const char* begin = t.data() + (!t.empty() && t.front() == '+' ? 1 : 0);
    const auto [ptr, ec] = std::from_chars(begin, t.data() + t.size(), value);
    if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size() || std::isnan(value)) {
        throw Error(where + ": cannot read number '" + t + "'");
    }
    return value;
}

std::vector<std::string> split(const std::string& s, char delim) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, delim)) out.push_back(trim(item));
    return out;
}

std::vector<double> numbers(const std::string& s, const std::string& where) {
    std::vector<double> out;
    std::istringstream in(s);
    std::string token;
    while (in >> token) out.push_back(to_number(token, where));
    return out;
}

bool to_bool(const std::string& text, const std::string& where) {
    const std::string t = trim(text);
    if (t == "true" || t == "yes" || t == "1") return true;
    if (t == "false" || t == "no" || t == "0") return false;
    throw Error(where + ": expected true or false, got '" + t + "'");
}

std::size_t to_count(const std::string& text, const std::string& where) {
    const double v = to_number(text, where);
    if (!(v >= 0.0) || v != std::floor(v) || v > 1e12) {
        throw Error(where + ": expected a non-negative integer, got '" + trim(text) + "'");
    }
    return static_cast<std::size_t>(v);
}

Param lookup_param(const std::string& name, const std::string& where) {
    const auto p = param_from_name(trim(name));
    if (!p) throw Error(where + ": unknown parameter '" + trim(name) + "'");
    return *p;
}

// "value", "value fixed" or "value [lo, hi]"
void read_parameter(ParameterSet& set, Param p, const std::string& text) {
    const std::string where = "[parameters] " + std::string(param_name(p));
    const std::string t = trim(text);
    const auto open = t.find('[');
    if (open == std::string::npos) {
        std::string value = t;
        const auto fixed_pos = value.find("fixed");
        if (fixed_pos != std::string::npos) value = value.substr(0, fixed_pos);
        set.values[p] = to_number(value, where);
        set.bound(p) = BoundSpec::fixed();
        return;
    }
    const auto close = t.find(']', open);
    if (close == std::string::npos || trim(t.substr(close + 1)).size() != 0) {
        throw Error(where + ": expected 'value [lower, upper]'");
    }
    const auto limits = split(t.substr(open + 1, close - open - 1), ',');
    if (limits.size() != 2) throw Error(where + ": bounds need exactly two entries");
    const double lo = to_number(limits[0], where);
    const double hi = to_number(limits[1], where);
    set.values[p] = to_number(t.substr(0, open), where);
    if (!std::isfinite(lo) && !std::isfinite(hi)) {
        throw BadBounds(where + ": at least one bound must be finite");
    }
    if (std::isfinite(lo) && std::isfinite(hi) && !(lo < hi)) {
        throw BadBounds(where + ": lower bound " + format_double(lo) +
                        " is not below upper bound " + format_double(hi));
    }
    set.bound(p) = BoundSpec::from_limits(lo, hi);
}

std::vector<LoadStepProfile> read_profiles(const pt::ptree& section) {
    const auto power = section.get_optional<std::string>("power_steps");
    const auto resistance = section.get_optional<std::string>("resistance_steps");
    if (static_cast<bool>(power) == static_cast<bool>(resistance)) {
        throw Error("[profile]: give exactly one of power_steps or resistance_steps");
    }
    for (const auto& [key, value] : section) {
        if (key != "power_steps" && key != "resistance_steps") {
            throw Error("[profile]: unknown key '" + key + "'");
        }
    }
    const std::string where = power ? "[profile] power_steps" : "[profile] resistance_steps";
    std::vector<LoadStepProfile> out;
    for (const std::string& entry : split(power ? *power : *resistance, ';')) {
        if (entry.empty()) continue;
        const auto v = numbers(entry, where);
        if (v.size() != 3) throw Error(where + ": each test needs 'pre post t_step'");
        LoadStepProfile profile = power ? LoadStepProfile::from_power(v[0], v[1], v[2])
                                        : LoadStepProfile{v[0], v[1], v[2]};
        profile.validate();
        out.push_back(profile);
    }
    if (out.empty()) throw Error(where + ": no load tests given");
    return out;
}

template <typename Fn>
void each_key(const pt::ptree& root, const std::string& section, Fn fn) {
    const auto node = root.get_child_optional(pt::ptree::path_type(section, '\0'));
    if (!node) return;
    for (const auto& [key, value] : *node) fn(key, value.data(), "[" + section + "] " + key);
}

}  // namespace

std::string to_string(Method method) {
    switch (method) {
        case Method::Hbclm: return "hbclm";
        case Method::Bclm: return "bclm";
    }
    return "unknown";
}

void check_initial_values(const ParameterSet& params) {
    const auto ids = params.free_params();
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const BoundSpec& s = params.bound(ids[i]);
        const double v = params.values[ids[i]];
        if (!s.contains(v)) {
            throw OutOfBounds(i, "initial value of " + std::string(param_name(ids[i])) + " = " +
                                     format_double(v) + " violates its bounds " + s.describe());
        }
    }
}

void FitConfig::validate() const {
    for (Param p : params.free_params()) {
        try {
            validate_bounds(std::span<const BoundSpec>(&params.bound(p), 1));
        } catch (const BadBounds& e) {
            throw BadBounds(std::string(param_name(p)) + " " + params.bound(p).describe() + ": " +
                            e.what());
        }
    }
    if (params.free_params().empty()) throw Error("no free parameters to estimate");
    if (profiles.empty()) throw Error("no load tests configured");
    for (const LoadStepProfile& p : profiles) p.validate();
    sim.validate();
    stopping.validate();
    ga.validate(params.free_params().size());
}

FitConfig parse_config(std::istream& in) {
    pt::ptree root;
    try {
        pt::read_ini(in, root);
    } catch (const pt::ini_parser_error& e) {
        throw ParseError(e.line(), e.message());
    }
    for (const auto& [name, node] : root) {
        static const char* known[] = {"parameters", "profile", "sim", "ga", "stopping", "seed", "solver"};
        bool ok = false;
        for (const char* k : known) ok = ok || name == k;
        if (!ok) throw Error("unknown section [" + name + "]");
    }

    FitConfig cfg;
    cfg.params = ParameterSet{};
    each_key(root, "parameters", [&](const std::string& key, const std::string& value,
                                     const std::string& where) {
        read_parameter(cfg.params, lookup_param(key, where), value);
    });

    const auto profile = root.get_child_optional("profile");
    if (!profile) throw Error("missing [profile] section");
    cfg.profiles = read_profiles(*profile);

    each_key(root, "sim", [&](const std::string& key, const std::string& value, const std::string& where) {
        if (key == "t_end") cfg.sim.t_end = to_number(value, where);
        else if (key == "h") cfg.sim.h = to_number(value, where);
        else if (key == "sample_stride") cfg.sim.sample_stride = to_count(value, where);
        else throw Error(where + ": unknown key");
    });

    std::vector<std::pair<Param, double>> caps;
    each_key(root, "ga", [&](const std::string& key, const std::string& value, const std::string& where) {
        if (key == "population") cfg.ga.population = to_count(value, where);
        else if (key == "generations") cfg.ga.generations = to_count(value, where);
        else if (key == "mutate_fraction") cfg.ga.mutate_fraction = to_number(value, where);
        else if (key == "elite") cfg.ga.elite = to_count(value, where);
        else if (key == "caps") {
            for (const std::string& item : split(value, ',')) {
                if (item.empty()) continue;
                const auto colon = item.find(':');
                if (colon == std::string::npos) throw Error(where + ": expected name:width entries");
                const double width = to_number(item.substr(colon + 1), where);
                if (!(width > 0.0) || !std::isfinite(width)) throw Error(where + ": widths must be positive");
                caps.emplace_back(lookup_param(item.substr(0, colon), where), width);
            }
        } else throw Error(where + ": unknown key");
    });

    each_key(root, "stopping", [&](const std::string& key, const std::string& value, const std::string& where) {
        if (key == "max_iterations") cfg.stopping.max_iterations = static_cast<int>(to_count(value, where));
        else if (key == "rel_cost_tol") cfg.stopping.rel_cost_tol = to_number(value, where);
        else throw Error(where + ": unknown key");
    });

    each_key(root, "seed", [&](const std::string& key, const std::string& value, const std::string& where) {
        if (key == "value") cfg.seed = static_cast<std::uint64_t>(to_count(value, where));
        else throw Error(where + ": unknown key");
    });

    each_key(root, "solver", [&](const std::string& key, const std::string& value, const std::string& where) {
        if (key == "method") {
            const std::string m = trim(value);
            if (m == "hbclm") cfg.method = Method::Hbclm;
            else if (m == "bclm") cfg.method = Method::Bclm;
            else throw Error(where + ": expected hbclm or bclm");
        } else if (key == "column_scaling") {
            cfg.column_scaling = to_bool(value, where);
        } else throw Error(where + ": unknown key");
    });

    if (!caps.empty()) {
        for (Param p : cfg.params.free_params()) {
            double width = 10.0;
            for (const auto& [q, w] : caps) {
                if (q == p) width = w;
            }
            cfg.ga.caps.push_back(width);
        }
        for (const auto& [q, w] : caps) {
            if (!cfg.params.bound(q).is_free()) {
                throw Error("[ga] caps: " + std::string(param_name(q)) + " is not a free parameter");
            }
        }
    }
    cfg.validate();
    return cfg;
}

FitConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file " + path.string());
    return parse_config(in);
}

std::string write_config(const FitConfig& config) {
    std::ostringstream os;
    auto limit = [](double v) {
        if (std::isinf(v)) return std::string(v > 0 ? "inf" : "-inf");
        return format_double(v);
    };
    os << "[parameters]\n";
    for (Param p : all_params()) {
        const BoundSpec& s = config.params.bound(p);
        os << param_name(p) << " = " << format_double(config.params.values[p]);
        if (s.is_free()) os << " [" << limit(s.lower_limit()) << ", " << limit(s.upper_limit()) << "]";
        os << '\n';
    }
    os << "\n[profile]\nresistance_steps = ";
    for (std::size_t i = 0; i < config.profiles.size(); ++i) {
        const LoadStepProfile& p = config.profiles[i];
        if (i) os << "; ";
        os << format_double(p.r_pre) << ' ' << format_double(p.r_post) << ' ' << format_double(p.t_step);
    }
    os << "\n\n[sim]\nt_end = " << format_double(config.sim.t_end) << "\nh = " << format_double(config.sim.h)
       << "\nsample_stride = " << config.sim.sample_stride << '\n';
    os << "\n[ga]\npopulation = " << config.ga.population << "\ngenerations = " << config.ga.generations
       << "\nmutate_fraction = " << format_double(config.ga.mutate_fraction) << "\nelite = " << config.ga.elite
       << '\n';
    if (!config.ga.caps.empty()) {
        os << "caps = ";
        const auto ids = config.params.free_params();
        for (std::size_t i = 0; i < ids.size() && i < config.ga.caps.size(); ++i) {
            if (i) os << ", ";
            os << param_name(ids[i]) << ':' << format_double(config.ga.caps[i]);
        }
        os << '\n';
    }
    os << "\n[stopping]\nmax_iterations = " << config.stopping.max_iterations
       << "\nrel_cost_tol = " << format_double(config.stopping.rel_cost_tol) << '\n';
    os << "\n[seed]\nvalue = " << config.seed << '\n';
    os << "\n[solver]\nmethod = " << to_string(config.method)
       << "\ncolumn_scaling = " << (config.column_scaling ? "true" : "false") << '\n';
    return os.str();
}

}  // namespace dgparam
