#pragma once

// Independent auditing of a computed flow: the full axisymmetric stationary
// Navier-Stokes residual in physical space, divergence, boundary mismatch and
// decay-exponent fits.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "asns/fourier_core.hpp"
#include "asns/radial_numerics.hpp"

namespace asns {

struct DecayFit {
    double exponent = 0.0;
    double r_squared = 0.0;
    int points = 0;
};

// Least-squares slope of log|s| against log r over the last decade [R_max/10, R_max].
// Throws std::domain_error when the window holds no nonzero sample.
DecayFit decay_fit(const RadialGrid& grid, const CVec& s);
DecayFit decay_fit(const RadialGrid& grid, const RadialProfile& p);

struct ResidualOptions {
    int z_samples = 0;          // 0 selects 4K + 1
    double min_spacing = 0.0;   // FD spacing floor for velocity derivatives
    double curl_spacing = 1e-3; // spacing floor for the extra radial derivative of the curl form
    double split_fraction = 0.5;  // inner region is r <= split_fraction * R_max
    double z_shift = 0.0;       // offset of the z sample points
};

struct ResidualRow {
    double r = 0.0;
    double momentum_theta = 0.0;
    double curl_rz = 0.0;
    double divergence = 0.0;
    double momentum_r = 0.0;
    double momentum_z = 0.0;
};

struct RegionResidual {
    double momentum_theta = 0.0;
    double curl_rz = 0.0;  // d_z R_r - d_r R_z, pressure eliminated
    double divergence = 0.0;
    std::optional<double> momentum_r;  // only with a pressure field
    std::optional<double> momentum_z;

    double max_momentum() const;
};

struct ResidualReport {
    RegionResidual inner;  // r <= split
    RegionResidual outer;  // r > split
    double r_split = 0.0;
    double max_boundary_mismatch = 0.0;
    double imag_residue = 0.0;
    std::map<std::string, DecayFit> decay_fits;  // "theta_0", "z_0", "r_1", ...
    int n_radial = 0;
    int k_max = 0;
    int z_samples = 0;
    double r_max = 0.0;
    std::vector<ResidualRow> curve;  // max over z at each node
};

// Residual of the full system for u = background + v.  `pressure`, when given,
// holds the modes of the pressure perturbation on top of the background
// pressure -(nu^2 + mu^2)/(2 r^2); without it only the curl form is checked.
ResidualReport residual_asns(const FourierField& v, const RadialGrid& grid, const Background& background,
                             const ForcingData& f, const BoundaryData* g = nullptr,
                             const ModeSeries* pressure = nullptr, const ResidualOptions& opts = {});

}  // namespace asns
