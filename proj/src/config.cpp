#include "prw/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace prw {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

} // namespace

WalkModel ModelConfig::build() const {
    if (dependence == Dependence::correlated_example) {
        return WalkModel::correlated_example(lambda1, lambda2);
    }
    if (!increment || !perturbation) {
        throw Error(ErrorCode::config_error,
                    "independent models need both increment and perturbation");
    }
    return WalkModel::independent(*increment, *perturbation);
}

std::string ModelConfig::serialize() const {
    std::ostringstream os;
    if (dependence == Dependence::correlated_example) {
        os << "dependence=correlated(" << lambda1 << "," << lambda2 << ")\n";
    } else {
        os << "dependence=independent\n";
        if (increment) os << "increment=" << increment->to_string() << "\n";
        if (perturbation) os << "perturbation=" << perturbation->to_string() << "\n";
    }
    if (interarrival) os << "interarrival=" << interarrival->to_string() << "\n";
    if (service) os << "service=" << service->to_string() << "\n";
    if (delay) os << "delay=" << delay->to_string() << "\n";
    return os.str();
}

ModelConfig parse_config(const std::string& text) {
    ModelConfig cfg;
    std::vector<std::string> errors;
    bool seen_dependence = false;
    std::vector<std::string> seen_keys;

    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(line_no) + ": expected key=value");
            continue;
        }
        const std::string key = lower(trim(line.substr(0, eq)));
        const std::string value = trim(line.substr(eq + 1));

        if (std::find(seen_keys.begin(), seen_keys.end(), key) != seen_keys.end()) {
            errors.push_back("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
            continue;
        }
        seen_keys.push_back(key);

        auto parse_dist = [&](std::optional<DistributionSpec>& slot) {
            try {
                slot = parse_distribution(value);
            } catch (const Error& e) {
                errors.push_back("line " + std::to_string(line_no) + ": " + e.what());
            }
        };

        if (key == "increment") {
            parse_dist(cfg.increment);
        } else if (key == "perturbation") {
            parse_dist(cfg.perturbation);
        } else if (key == "interarrival") {
            parse_dist(cfg.interarrival);
        } else if (key == "service") {
            parse_dist(cfg.service);
        } else if (key == "delay") {
            parse_dist(cfg.delay);
        } else if (key == "dependence") {
            seen_dependence = true;
            const std::string v = lower(value);
            if (v == "independent") {
                cfg.dependence = Dependence::independent;
            } else if (v.rfind("correlated(", 0) == 0 && v.back() == ')') {
                const std::string args = v.substr(11, v.size() - 12);
                const auto comma = args.find(',');
                if (comma == std::string::npos) {
                    errors.push_back("line " + std::to_string(line_no) +
                                     ": correlated mode needs correlated(lambda1,lambda2)");
                } else {
                    try {
                        cfg.dependence = Dependence::correlated_example;
                        cfg.lambda1 = std::stod(args.substr(0, comma));
                        cfg.lambda2 = std::stod(args.substr(comma + 1));
                    } catch (const std::exception&) {
                        errors.push_back("line " + std::to_string(line_no) +
                                         ": bad correlated rates '" + value + "'");
                    }
                }
            } else {
                errors.push_back("line " + std::to_string(line_no) +
                                 ": unknown dependence mode '" + value + "'");
            }
        } else {
            errors.push_back("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }

    if (cfg.dependence == Dependence::correlated_example &&
        (cfg.increment || cfg.perturbation)) {
        errors.push_back(
            "correlated dependence fixes the increment and perturbation laws; "
            "remove those keys");
    }
    if (!seen_dependence && !cfg.increment && !cfg.perturbation && !cfg.interarrival) {
        errors.push_back("config declares no model");
    }

    if (!errors.empty()) throw ConfigParseError(std::move(errors));
    return cfg;
}

ModelConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigParseError({"cannot open model file '" + path + "'"});
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

} // namespace prw
