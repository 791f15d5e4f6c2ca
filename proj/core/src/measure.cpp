#include "lambdacoal/measure.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "lambdacoal/errors.hpp"
#include "lambdacoal/quadrature.hpp"

namespace lambdacoal {

namespace {

void validate_atom(const Atom& a) {
    if (!std::isfinite(a.location) || a.location < 0.0 || a.location > 1.0)
        throw ValidationError("atom location must lie in [0,1]");
    if (a.location == 1.0)
        throw ValidationError("atom at location 1 is not allowed");
    if (!std::isfinite(a.mass) || a.mass <= 0.0)
        throw ValidationError("atom mass must be positive");
}

void validate_density(const Density& d) {
    if (!std::isfinite(d.weight) || d.weight <= 0.0)
        throw ValidationError("density weight must be positive");
    if (const auto* u = std::get_if<UniformDensity>(&d.kind)) {
        if (!(u->lo >= 0.0 && u->lo < u->hi && u->hi <= 1.0))
            throw ValidationError("uniform density needs 0 <= lo < hi <= 1");
    } else if (const auto* b = std::get_if<BetaDensity>(&d.kind)) {
        if (!(b->p > 0.0) || !(b->q > 0.0))
            throw ValidationError("beta shape parameters must be > 0");
    } else {
        const auto& p = std::get<PowerDensity>(d.kind);
        if (!(p.exponent > -1.0))
            throw ValidationError("power density exponent must be > -1");
    }
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

LambdaMeasure::LambdaMeasure(std::vector<Atom> atoms, std::vector<Density> densities)
    : atoms_(std::move(atoms)), densities_(std::move(densities)) {
    for (const Atom& a : atoms_) validate_atom(a);
    for (const Density& d : densities_) validate_density(d);
    double total = 0.0;
    for (const Atom& a : atoms_) total += a.mass;
    for (const Density& d : densities_) total += d.weight;
    if (!(total > 0.0) || !std::isfinite(total))
        throw ValidationError("measure must have positive finite total mass");
    total_mass_ = total;
}

double LambdaMeasure::atom_mass_at_zero() const {
    double m = 0.0;
    for (const Atom& a : atoms_)
        if (a.location == 0.0) m += a.mass;
    return m;
}

double LambdaMeasure::mass_below(double x) const {
    if (x <= 0.0) return 0.0;
    double m = 0.0;
    for (const Atom& a : atoms_)
        if (a.location > 0.0 && a.location < x) m += a.mass;
    for (const Density& d : densities_) {
        if (const auto* u = std::get_if<UniformDensity>(&d.kind)) {
            if (x > u->lo)
                m += d.weight * (std::min(x, u->hi) - u->lo) / (u->hi - u->lo);
        } else if (std::get_if<BetaDensity>(&d.kind) != nullptr) {
            if (x >= 1.0)
                m += d.weight;
            else
                m += integrate_density_against(d, [](double) { return 1.0; }, 0.0, 0.0, x);
        } else {
            const auto& pw = std::get<PowerDensity>(d.kind);
            m += d.weight * std::pow(std::min(x, 1.0), pw.exponent + 1.0);
        }
    }
    return m;
}

double LambdaMeasure::positive_support_infimum() const {
    double inf = 1.0;
    bool any = false;
    for (const Atom& a : atoms_) {
        if (a.location > 0.0) {
            inf = std::min(inf, a.location);
            any = true;
        }
    }
    for (const Density& d : densities_) {
        any = true;
        if (const auto* u = std::get_if<UniformDensity>(&d.kind))
            inf = std::min(inf, u->lo);
        else
            inf = 0.0; // beta and power densities reach down to 0
    }
    return any ? inf : 1.0;
}

LambdaMeasure LambdaMeasure::scaled(double c) const {
    if (!(c > 0.0))
        throw ValidationError("scale factor must be positive");
    std::vector<Atom> atoms = atoms_;
    std::vector<Density> densities = densities_;
    for (Atom& a : atoms) a.mass *= c;
    for (Density& d : densities) d.weight *= c;
    return LambdaMeasure(std::move(atoms), std::move(densities));
}

std::string LambdaMeasure::to_spec_string() const {
    std::ostringstream out;
    bool first = true;
    auto sep = [&]() {
        if (!first) out << " + ";
        first = false;
    };
    for (const Atom& a : atoms_) {
        sep();
        out << "atom:" << format_double(a.location) << "," << format_double(a.mass);
    }
    for (const Density& d : densities_) {
        sep();
        if (d.weight != 1.0) out << format_double(d.weight) << "*";
        if (const auto* u = std::get_if<UniformDensity>(&d.kind))
            out << "uniform:" << format_double(u->lo) << "," << format_double(u->hi);
        else if (const auto* b = std::get_if<BetaDensity>(&d.kind))
            out << "beta:" << format_double(b->p) << "," << format_double(b->q);
        else
            out << "power:" << format_double(std::get<PowerDensity>(d.kind).exponent);
    }
    return out.str();
}

double total_mass(const LambdaMeasure& measure) { return measure.total_mass(); }

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& text, const std::string& context) {
    const std::string t = trim(text);
    if (t.empty()) throw ParseError("missing number in " + context);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size())
        throw ParseError("bad number '" + t + "' in " + context);
    if (!std::isfinite(v))
        throw ParseError("non-finite number in " + context);
    return v;
}

std::vector<double> parse_args(const std::string& text, std::size_t expect,
                               const std::string& context) {
    std::vector<double> args;
    std::string cur;
    std::istringstream in(text);
    while (std::getline(in, cur, ','))
        args.push_back(parse_number(cur, context));
    if (args.size() != expect)
        throw ParseError(context + " expects " + std::to_string(expect) + " arguments");
    return args;
}

void parse_term(const std::string& term, std::vector<Atom>& atoms,
                std::vector<Density>& densities) {
    std::string body = trim(term);
    if (body.empty()) throw ParseError("empty term in measure spec");

    double weight = 1.0;
    if (const auto star = body.find('*'); star != std::string::npos) {
        weight = parse_number(body.substr(0, star), "weight prefix");
        if (!(weight > 0.0)) throw ValidationError("weight prefix must be positive");
        body = trim(body.substr(star + 1));
    }

    std::string name = body;
    std::string args;
    if (const auto colon = body.find(':'); colon != std::string::npos) {
        name = trim(body.substr(0, colon));
        args = body.substr(colon + 1);
    }

    if (name == "kingman") {
        if (!args.empty()) throw ParseError("kingman takes no arguments");
        atoms.push_back({0.0, weight});
    } else if (name == "bolthausen-sznitman") {
        if (!args.empty()) throw ParseError("bolthausen-sznitman takes no arguments");
        densities.push_back({weight, UniformDensity{0.0, 1.0}});
    } else if (name == "uniform") {
        if (args.empty()) {
            densities.push_back({weight, UniformDensity{0.0, 1.0}});
        } else {
            const auto a = parse_args(args, 2, "uniform");
            densities.push_back({weight, UniformDensity{a[0], a[1]}});
        }
    } else if (name == "beta") {
        const auto a = parse_args(args, 2, "beta");
        densities.push_back({weight, BetaDensity{a[0], a[1]}});
    } else if (name == "power") {
        const auto a = parse_args(args, 1, "power");
        densities.push_back({weight, PowerDensity{a[0]}});
    } else if (name == "atom") {
        const auto a = parse_args(args, 2, "atom");
        atoms.push_back({a[0], weight * a[1]});
    } else {
        throw ParseError("unknown measure component '" + name + "'");
    }
}

} // namespace

LambdaMeasure parse_measure(const std::string& spec) {
    std::vector<Atom> atoms;
    std::vector<Density> densities;
    std::string cur;
    std::istringstream in(spec);
    bool any = false;
    while (std::getline(in, cur, '+')) {
        parse_term(cur, atoms, densities);
        any = true;
    }
    if (!any) throw ParseError("empty measure spec");
    return LambdaMeasure(std::move(atoms), std::move(densities));
}

} // namespace lambdacoal
