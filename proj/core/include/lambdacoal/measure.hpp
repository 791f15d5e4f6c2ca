#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace lambdacoal {

/// Point mass at a location in [0,1). An atom at 1 is rejected at
/// construction: coalescents driven by such measures are degenerate
/// (everything merges at once) and are excluded from the model class.
struct Atom {
    double location = 0.0;
    double mass = 1.0;
};

/// Uniform probability density on [lo, hi] \subseteq [0,1].
struct UniformDensity {
    double lo = 0.0;
    double hi = 1.0;
};

/// Beta(p, q) probability density on (0,1).
struct BetaDensity {
    double p = 1.0;
    double q = 1.0;
};

/// Normalized power density (g+1) x^g on (0,1], g > -1.
struct PowerDensity {
    double exponent = 0.0;
};

using DensityKind = std::variant<UniformDensity, BetaDensity, PowerDensity>;

/// A density component: `weight` times a normalized probability density,
/// so the component contributes exactly `weight` to the total mass.
struct Density {
    double weight = 1.0;
    DensityKind kind;
};

/// A finite measure on [0,1]: atoms plus weighted densities from a small
/// closed family (uniform / beta / power). The closed family keeps merger
/// rates in closed form while covering the standard coalescent drivers:
/// a unit atom at 0 (Kingman), uniform on [0,1] (Bolthausen-Sznitman),
/// and Beta(2-a, a).
///
/// Immutable after construction; all accessors are pure.
class LambdaMeasure {
public:
    LambdaMeasure(std::vector<Atom> atoms, std::vector<Density> densities);

    const std::vector<Atom>& atoms() const { return atoms_; }
    const std::vector<Density>& densities() const { return densities_; }

    double total_mass() const { return total_mass_; }
    double atom_mass_at_zero() const;

    /// Measure of (0, x): continuous mass below x plus atoms in (0, x).
    /// The atom at 0, if any, is excluded.
    double mass_below(double x) const;

    /// Infimum of the support of the restriction to (0,1]; 1.0 if that
    /// restriction is the zero measure.
    double positive_support_infimum() const;

    /// Measure scaled by c > 0.
    LambdaMeasure scaled(double c) const;

    /// Canonical textual form, re-parseable by parse_measure.
    std::string to_spec_string() const;

private:
    std::vector<Atom> atoms_;
    std::vector<Density> densities_;
    double total_mass_ = 0.0;
};

/// Parse a textual measure specification. Grammar (documented in
/// docs/measure_grammar.md):
///
///   spec   = term , { "+" , term } ;
///   term   = [ weight , "*" ] , base ;
///   base   = "kingman" | "bolthausen-sznitman"
///          | "uniform" [ ":" lo "," hi ]
///          | "beta" ":" p "," q
///          | "power" ":" g
///          | "atom" ":" x "," m ;
///
/// Presets: "kingman" is atom:0,1 and "bolthausen-sznitman" is uniform on
/// [0,1] with weight 1. Throws ParseError for malformed text and
/// ValidationError for invalid parameters (atom at 1, nonpositive masses,
/// nonpositive shape parameters, empty measure).
LambdaMeasure parse_measure(const std::string& spec);

double total_mass(const LambdaMeasure& measure);

} // namespace lambdacoal
