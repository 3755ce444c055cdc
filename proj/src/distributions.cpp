#include "prw/distributions.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <vector>

#include "prw/numerics.hpp"

namespace prw {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw Error(ErrorCode::invalid_parameter,
                    std::string(name) + " must be strictly positive");
    }
}

double std_normal_pdf(double z) {
    static const double inv_sqrt_2pi = 0.3989422804014326779399461;
    return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

double std_normal_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

} // namespace

DistributionSpec DistributionSpec::exponential(double rate) {
    require_positive(rate, "rate");
    return {Family::exponential, rate, 0.0};
}

DistributionSpec DistributionSpec::negated_exponential(double rate) {
    require_positive(rate, "rate");
    return {Family::negated_exponential, rate, 0.0};
}

DistributionSpec DistributionSpec::exp_difference(double pos_rate, double neg_rate) {
    require_positive(pos_rate, "pos_rate");
    require_positive(neg_rate, "neg_rate");
    return {Family::exp_difference, pos_rate, neg_rate};
}

DistributionSpec DistributionSpec::normal(double mean, double std) {
    require_positive(std, "std");
    if (!std::isfinite(mean)) {
        throw Error(ErrorCode::invalid_parameter, "mean must be finite");
    }
    return {Family::normal, mean, std};
}

DistributionSpec DistributionSpec::pareto(double shape, double scale) {
    require_positive(shape, "shape");
    require_positive(scale, "scale");
    return {Family::pareto, shape, scale};
}

DistributionSpec DistributionSpec::weibull(double shape, double scale) {
    require_positive(shape, "shape");
    require_positive(scale, "scale");
    return {Family::weibull, shape, scale};
}

DistributionSpec DistributionSpec::deterministic(double value) {
    if (!std::isfinite(value)) {
        throw Error(ErrorCode::invalid_parameter, "value must be finite");
    }
    return {Family::deterministic, value, 0.0};
}

double DistributionSpec::sample(RandomStream& stream) const {
    switch (family_) {
        case Family::exponential:
            return stream.next_exponential(a_);
        case Family::negated_exponential:
            return -stream.next_exponential(a_);
        case Family::exp_difference: {
            const double v = stream.next_exponential(a_);
            const double u = stream.next_exponential(b_);
            return v - u;
        }
        case Family::normal:
            return a_ + b_ * stream.next_normal();
        case Family::pareto:
            // inverse survival: x = scale * (u^(-1/shape) - 1)
            return b_ * std::expm1(-std::log(stream.next_unit()) / a_);
        case Family::weibull:
            return b_ * std::pow(-std::log(stream.next_unit()), 1.0 / a_);
        case Family::deterministic:
            return a_;
    }
    return 0.0; // unreachable
}

double DistributionSpec::tail(double x) const {
    switch (family_) {
        case Family::exponential:
            return x < 0.0 ? 1.0 : std::exp(-a_ * x);
        case Family::negated_exponential:
            return x >= 0.0 ? 0.0 : -std::expm1(a_ * x);
        case Family::exp_difference: {
            const double lv = a_, lu = b_;
            if (x >= 0.0) return lu / (lv + lu) * std::exp(-lv * x);
            return 1.0 - lv / (lv + lu) * std::exp(lu * x);
        }
        case Family::normal:
            return std_normal_tail((x - a_) / b_);
        case Family::pareto:
            return x < 0.0 ? 1.0 : std::exp(-a_ * std::log1p(x / b_));
        case Family::weibull:
            return x < 0.0 ? 1.0 : std::exp(-std::pow(x / b_, a_));
        case Family::deterministic:
            return x < a_ ? 1.0 : 0.0;
    }
    return 0.0;
}

double DistributionSpec::density(double x) const {
    switch (family_) {
        case Family::exponential:
            return x < 0.0 ? 0.0 : a_ * std::exp(-a_ * x);
        case Family::negated_exponential:
            return x > 0.0 ? 0.0 : a_ * std::exp(a_ * x);
        case Family::exp_difference: {
            const double lv = a_, lu = b_;
            const double c = lv * lu / (lv + lu);
            return x >= 0.0 ? c * std::exp(-lv * x) : c * std::exp(lu * x);
        }
        case Family::normal:
            return std_normal_pdf((x - a_) / b_) / b_;
        case Family::pareto:
            return x < 0.0 ? 0.0
                           : (a_ / b_) * std::exp(-(a_ + 1.0) * std::log1p(x / b_));
        case Family::weibull: {
            if (x < 0.0) return 0.0;
            if (x == 0.0) {
                if (a_ < 1.0) return kInf;
                if (a_ == 1.0) return 1.0 / b_;
                return 0.0;
            }
            const double z = x / b_;
            return (a_ / b_) * std::pow(z, a_ - 1.0) * std::exp(-std::pow(z, a_));
        }
        case Family::deterministic:
            throw Error(ErrorCode::unsupported_family,
                        "deterministic law has no density");
    }
    return 0.0;
}

double DistributionSpec::mgf(double theta) const {
    if (theta == 0.0) return 1.0;
    switch (family_) {
        case Family::exponential:
            return theta < a_ ? a_ / (a_ - theta) : kInf;
        case Family::negated_exponential:
            return theta > -a_ ? a_ / (a_ + theta) : kInf;
        case Family::exp_difference: {
            const double lv = a_, lu = b_;
            if (theta >= lv || theta <= -lu) return kInf;
            return (lv / (lv - theta)) * (lu / (lu + theta));
        }
        case Family::normal:
            return std::exp(a_ * theta + 0.5 * b_ * b_ * theta * theta);
        case Family::pareto: {
            if (theta > 0.0) return kInf;
            return integrate(
                [this, theta](double x) {
                    const double f = density(x);
                    return f > 0.0 ? std::exp(theta * x) * f : 0.0;
                },
                0.0, kInf);
        }
        case Family::weibull: {
            if (a_ == 1.0) {
                const double rate = 1.0 / b_;
                return theta < rate ? rate / (rate - theta) : kInf;
            }
            if (a_ < 1.0 && theta > 0.0) return kInf;
            return integrate(
                [this, theta](double x) {
                    const double f = density(x);
                    return f > 0.0 ? std::exp(theta * x) * f : 0.0;
                },
                0.0, kInf);
        }
        case Family::deterministic:
            return std::exp(theta * a_);
    }
    return kInf;
}

double DistributionSpec::mgf_boundary() const {
    switch (family_) {
        case Family::exponential:
            return a_;
        case Family::exp_difference:
            return a_;
        case Family::pareto:
            return 0.0;
        case Family::weibull:
            if (a_ > 1.0) return kInf;
            if (a_ == 1.0) return 1.0 / b_;
            return 0.0;
        default:
            return kInf;
    }
}

double DistributionSpec::cgf(double theta) const {
    if (theta == 0.0) return 0.0;
    switch (family_) {
        case Family::exponential:
            return theta < a_ ? std::log(a_) - std::log(a_ - theta) : kInf;
        case Family::negated_exponential:
            return theta > -a_ ? std::log(a_) - std::log(a_ + theta) : kInf;
        case Family::exp_difference: {
            const double lv = a_, lu = b_;
            if (theta >= lv || theta <= -lu) return kInf;
            return std::log(lv) - std::log(lv - theta) + std::log(lu) - std::log(lu + theta);
        }
        case Family::normal:
            return a_ * theta + 0.5 * b_ * b_ * theta * theta;
        case Family::deterministic:
            return theta * a_;
        default: {
            const double m = mgf(theta);
            return std::isfinite(m) ? std::log(m) : kInf;
        }
    }
}

double DistributionSpec::cgf_prime(double theta) const {
    switch (family_) {
        case Family::exponential:
            if (theta >= a_) throw Error(ErrorCode::divergent_moment, "cgf diverges at theta");
            return 1.0 / (a_ - theta);
        case Family::negated_exponential:
            if (theta <= -a_) throw Error(ErrorCode::divergent_moment, "cgf diverges at theta");
            return -1.0 / (a_ + theta);
        case Family::exp_difference:
            if (theta >= a_ || theta <= -b_) {
                throw Error(ErrorCode::divergent_moment, "cgf diverges at theta");
            }
            return 1.0 / (a_ - theta) - 1.0 / (b_ + theta);
        case Family::normal:
            return a_ + b_ * b_ * theta;
        case Family::deterministic:
            return a_;
        default: {
            // central difference, step per the magnitude of theta
            const double h = 1e-6 * std::max(1.0, std::abs(theta));
            const double up = cgf(theta + h);
            const double dn = cgf(theta - h);
            if (!std::isfinite(up) || !std::isfinite(dn)) {
                throw Error(ErrorCode::divergent_moment, "cgf diverges near theta");
            }
            return (up - dn) / (2.0 * h);
        }
    }
}

double DistributionSpec::exp_moment(double theta) const {
    if (theta == 0.0) return mean();
    switch (family_) {
        case Family::exponential:
            return theta < a_ ? a_ / ((a_ - theta) * (a_ - theta)) : kInf;
        case Family::negated_exponential:
            return theta > -a_ ? -a_ / ((a_ + theta) * (a_ + theta)) : kInf;
        case Family::exp_difference: {
            const double m = mgf(theta);
            return std::isfinite(m) ? m * cgf_prime(theta) : kInf;
        }
        case Family::normal:
            return mgf(theta) * (a_ + b_ * b_ * theta);
        case Family::pareto: {
            if (theta > 0.0) return kInf;
            return integrate(
                [this, theta](double x) {
                    const double f = density(x);
                    return f > 0.0 ? x * std::exp(theta * x) * f : 0.0;
                },
                0.0, kInf);
        }
        case Family::weibull: {
            if (a_ == 1.0) {
                const double rate = 1.0 / b_;
                return theta < rate ? rate / ((rate - theta) * (rate - theta)) : kInf;
            }
            if (a_ < 1.0 && theta > 0.0) return kInf;
            return integrate(
                [this, theta](double x) {
                    const double f = density(x);
                    return f > 0.0 ? x * std::exp(theta * x) * f : 0.0;
                },
                0.0, kInf);
        }
        case Family::deterministic:
            return a_ * std::exp(theta * a_);
    }
    return kInf;
}

double DistributionSpec::hazard(double x) const {
    if (family_ == Family::deterministic) {
        throw Error(ErrorCode::undefined_hazard, "point mass has no hazard rate");
    }
    const double t = tail(x);
    if (t <= 0.0) {
        throw Error(ErrorCode::undefined_hazard, "hazard undefined where tail(x) = 0");
    }
    switch (family_) {
        case Family::exponential:
            return x < 0.0 ? 0.0 : a_;
        case Family::pareto:
            return x < 0.0 ? 0.0 : a_ / (b_ + x);
        case Family::weibull:
            if (x < 0.0) return 0.0;
            if (x == 0.0) return density(0.0); // tail(0) = 1
            return (a_ / b_) * std::pow(x / b_, a_ - 1.0);
        default:
            return density(x) / t;
    }
}

double DistributionSpec::integrated_tail(double x) const {
    switch (family_) {
        case Family::exponential:
            return x < 0.0 ? -x + 1.0 / a_ : std::exp(-a_ * x) / a_;
        case Family::negated_exponential:
            return x >= 0.0 ? 0.0 : -x + std::expm1(a_ * x) / a_;
        case Family::exp_difference: {
            const double lv = a_, lu = b_;
            const double r0 = lu / (lv * (lv + lu));
            if (x >= 0.0) return r0 * std::exp(-lv * x);
            return r0 - x - (lv / (lu * (lv + lu))) * (1.0 - std::exp(lu * x));
        }
        case Family::normal: {
            const double z = (x - a_) / b_;
            return b_ * (std_normal_pdf(z) - z * std_normal_tail(z));
        }
        case Family::pareto: {
            if (a_ <= 1.0) {
                throw Error(ErrorCode::divergent_integral,
                            "integrated tail diverges for pareto shape <= 1");
            }
            const double r0 = b_ / (a_ - 1.0);
            if (x < 0.0) return r0 - x;
            return r0 * std::exp((1.0 - a_) * std::log1p(x / b_));
        }
        case Family::weibull: {
            if (x <= 0.0) return mean() - x;
            const double z = std::pow(x / b_, a_);
            return (b_ / a_) * upper_incomplete_gamma(1.0 / a_, z);
        }
        case Family::deterministic:
            return x >= a_ ? 0.0 : a_ - x;
    }
    return 0.0;
}

double DistributionSpec::mean() const {
    switch (family_) {
        case Family::exponential:
            return 1.0 / a_;
        case Family::negated_exponential:
            return -1.0 / a_;
        case Family::exp_difference:
            return 1.0 / a_ - 1.0 / b_;
        case Family::normal:
            return a_;
        case Family::pareto:
            if (a_ <= 1.0) {
                throw Error(ErrorCode::infinite_mean, "pareto shape <= 1 has infinite mean");
            }
            return b_ / (a_ - 1.0);
        case Family::weibull:
            return b_ * std::tgamma(1.0 + 1.0 / a_);
        case Family::deterministic:
            return a_;
    }
    return 0.0;
}

double DistributionSpec::support_min() const {
    switch (family_) {
        case Family::exponential:
        case Family::pareto:
        case Family::weibull:
            return 0.0;
        case Family::deterministic:
            return a_;
        default:
            return -kInf;
    }
}

double DistributionSpec::support_max() const {
    switch (family_) {
        case Family::negated_exponential:
            return 0.0;
        case Family::deterministic:
            return a_;
        default:
            return kInf;
    }
}

std::optional<ExpTailFit> DistributionSpec::exp_tail_fit() const {
    switch (family_) {
        case Family::exponential:
            return ExpTailFit{1.0, a_, 0.0};
        case Family::exp_difference:
            return ExpTailFit{b_ / (a_ + b_), a_, 0.0};
        default:
            return std::nullopt;
    }
}

namespace {

std::string format_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // trim to the shortest representation that round-trips
    for (int prec = 1; prec < 17; ++prec) {
        char shorter[40];
        std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
        if (std::strtod(shorter, nullptr) == v) return shorter;
    }
    return buf;
}

} // namespace

std::string DistributionSpec::to_string() const {
    std::ostringstream os;
    switch (family_) {
        case Family::exponential:
            os << "exponential(" << format_num(a_) << ")";
            break;
        case Family::negated_exponential:
            os << "negatedexponential(" << format_num(a_) << ")";
            break;
        case Family::exp_difference:
            os << "expdifference(" << format_num(a_) << "," << format_num(b_) << ")";
            break;
        case Family::normal:
            os << "normal(" << format_num(a_) << "," << format_num(b_) << ")";
            break;
        case Family::pareto:
            os << "pareto(" << format_num(a_) << "," << format_num(b_) << ")";
            break;
        case Family::weibull:
            os << "weibull(" << format_num(a_) << "," << format_num(b_) << ")";
            break;
        case Family::deterministic:
            os << "deterministic(" << format_num(a_) << ")";
            break;
    }
    return os.str();
}

DistributionSpec parse_distribution(const std::string& text) {
    std::string s;
    s.reserve(text.size());
    for (char c : text) {
        if (!std::isspace(static_cast<unsigned char>(c))) {
            s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    const auto open = s.find('(');
    if (open == std::string::npos || s.back() != ')') {
        throw Error(ErrorCode::config_error,
                    "malformed distribution literal '" + text + "' (expected family(p1[,p2]))");
    }
    const std::string name = s.substr(0, open);
    const std::string args = s.substr(open + 1, s.size() - open - 2);

    std::vector<double> params;
    std::stringstream ss(args);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            throw Error(ErrorCode::config_error, "bad numeric parameter '" + tok + "' in '" + text + "'");
        }
        if (used != tok.size()) {
            throw Error(ErrorCode::config_error, "bad numeric parameter '" + tok + "' in '" + text + "'");
        }
        params.push_back(v);
    }

    auto need = [&](std::size_t n) {
        if (params.size() != n) {
            throw Error(ErrorCode::config_error,
                        "family '" + name + "' takes " + std::to_string(n) +
                            " parameter(s), got " + std::to_string(params.size()));
        }
    };

    if (name == "exponential") {
        need(1);
        return DistributionSpec::exponential(params[0]);
    }
    if (name == "negatedexponential" || name == "negated_exponential") {
        need(1);
        return DistributionSpec::negated_exponential(params[0]);
    }
    if (name == "expdifference" || name == "exp_difference") {
        need(2);
        return DistributionSpec::exp_difference(params[0], params[1]);
    }
    if (name == "normal") {
        need(2);
        return DistributionSpec::normal(params[0], params[1]);
    }
    if (name == "pareto") {
        need(2);
        return DistributionSpec::pareto(params[0], params[1]);
    }
    if (name == "weibull") {
        need(2);
        return DistributionSpec::weibull(params[0], params[1]);
    }
    if (name == "deterministic") {
        need(1);
        return DistributionSpec::deterministic(params[0]);
    }
    throw Error(ErrorCode::config_error, "unknown distribution family '" + name + "'");
}

} // namespace prw
