// SPDX-License-Identifier: Apache-2.0
//
// vabm - vision-assisted mmWave beam management co-simulator
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef VABM_CHANNEL_HPP
#define VABM_CHANNEL_HPP

// Narrowband geometric channel on a uniform linear array and the Q-beam codebook.
//
// Array angles are measured from the array axis, 0 to 180 degrees, with 90 degrees
// on the boresight. Facing the boresight, the axis points to the left, so array angle
// grows from left to right across the camera image.

#include "vabm/geometry.hpp"
#include "vabm/raytrace.hpp"
#include "vabm/scenario.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace vabm
{

template <typename Scalar>
using ComplexVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;
using ChannelVector = ComplexVector<double>;

/// cos(angle) evaluated as sin(90 - angle) so that broadside gives an exact zero.
template <typename Scalar>
Scalar direction_cosine(Scalar angle_deg)
{
    return std::sin((Scalar(90) - angle_deg) * Scalar(kPi / 180.0));
}

/// Array angle (deg) of a world azimuth for an array whose normal points at `boresight_deg`.
/// Values in [0, 180) are in front of the array; the rest lie behind it.
inline double array_angle_deg(double world_az_deg, double boresight_deg)
{
    return 90.0 - wrap_deg(world_az_deg - boresight_deg);
}

/// Inverse of array_angle_deg, returning a world azimuth in (-180, 180].
inline double world_azimuth_deg(double array_angle, double boresight_deg)
{
    return wrap_deg(boresight_deg + 90.0 - array_angle);
}

/// Steering vector for direction cosine u: element n has phase 2 pi d n u, unit modulus.
template <typename Scalar = double>
ComplexVector<Scalar> steering_vector(int elements, Scalar spacing_wavelengths, Scalar u)
{
    ComplexVector<Scalar> a(elements);
    for (int n = 0; n < elements; ++n)
        a[n] = std::polar(Scalar(1), Scalar(2 * kPi) * spacing_wavelengths * Scalar(n) * u);
    return a;
}

template <typename Scalar = double>
ComplexVector<Scalar> array_response(const ArrayConfig &array, Scalar angle_deg)
{
    return steering_vector<Scalar>(array.elements, Scalar(array.spacing_wavelengths), direction_cosine(angle_deg));
}

/// h = sum_l gain_l * a(theta_l), theta_l the AoD mapped into array angles.
/// Elevation is ignored. No paths gives the zero vector.
template <typename Scalar = double>
ComplexVector<Scalar> build_channel(std::span<const PathComponent> paths, const ArrayConfig &array,
                                    double boresight_deg)
{
    ComplexVector<Scalar> h = ComplexVector<Scalar>::Zero(array.elements);
    for (const auto &p : paths)
    {
        const Scalar theta = Scalar(array_angle_deg(p.aod_az_deg, boresight_deg));
        h += std::complex<Scalar>(p.gain) * array_response<Scalar>(array, theta);
    }
    return h;
}

template <typename Scalar = double>
struct BeamVectorT
{
    ComplexVector<Scalar> w; // unit norm
    double center_deg = 0.0;
    double lo_deg = 0.0; // bin [lo, hi)
    double hi_deg = 0.0;
};

template <typename Scalar = double>
struct CodebookT
{
    std::vector<BeamVectorT<Scalar>> beams;

    int size() const { return static_cast<int>(beams.size()); }

    /// Index of the half-open bin holding `angle_deg`, or nothing outside [0, 180).
    std::optional<int> bin_of(double angle_deg) const
    {
        if (!(angle_deg >= 0.0 && angle_deg < 180.0))
            return std::nullopt;
        const int q = size();
        int i = static_cast<int>(std::floor(angle_deg * q / 180.0));
        // Guard the floor against rounding on either side of an edge.
        if (i > 0 && angle_deg < beams[i].lo_deg)
            --i;
        if (i + 1 < q && angle_deg >= beams[i + 1].lo_deg)
            ++i;
        return std::min(std::max(i, 0), q - 1);
    }
};

using BeamVector = BeamVectorT<double>;
using Codebook = CodebookT<double>;

/// Q beams over [0, 180) with bins of width 180/Q and steering at the bin midpoints,
/// w_i = a(center_i) / sqrt(N). Mirror beams (i, Q-1-i) use exactly negated direction
/// cosines, so they are exact complex conjugates of each other.
template <typename Scalar = double>
CodebookT<Scalar> generate_codebook(const ArrayConfig &array, int q)
{
    if (q < 1)
        throw std::invalid_argument("generate_codebook: codebook size must be >= 1.");
    if (array.elements < 1)
        throw std::invalid_argument("generate_codebook: array needs at least one element.");

    std::vector<Scalar> u(q);
    for (int i = 0; i < (q + 1) / 2; ++i)
    {
        u[i] = direction_cosine(Scalar((i + 0.5) * 180.0 / q));
        u[q - 1 - i] = -u[i];
    }
    if (q % 2 == 1)
        u[q / 2] = Scalar(0);

    CodebookT<Scalar> cb;
    cb.beams.resize(q);
    const Scalar scale = Scalar(1) / std::sqrt(Scalar(array.elements));
    for (int i = 0; i < q; ++i)
    {
        auto &b = cb.beams[i];
        b.w = steering_vector<Scalar>(array.elements, Scalar(array.spacing_wavelengths), u[i]) * scale;
        b.lo_deg = i * 180.0 / q;
        b.hi_deg = (i + 1) * 180.0 / q;
        b.center_deg = (i + 0.5) * 180.0 / q;
    }
    return cb;
}

struct LinkBudget
{
    double tx_power_dbm = 0.0;
    double noise_power_dbm = 0.0;
};

/// SNR in dB: P_tx + 20 log10 |w^H h| - P_noise. A zero response gives -infinity.
template <typename Scalar>
double beam_snr(const ComplexVector<Scalar> &h, const ComplexVector<Scalar> &w, const LinkBudget &budget)
{
    if (h.size() != w.size())
        throw std::invalid_argument("beam_snr: channel and beam dimensions differ.");
    const double mag = static_cast<double>(std::abs(w.dot(h)));
    if (mag == 0.0)
        return -std::numeric_limits<double>::infinity();
    return budget.tx_power_dbm + 20.0 * std::log10(mag) - budget.noise_power_dbm;
}

struct BeamSweep
{
    std::optional<int> index; // nothing on outage
    double snr_db = -std::numeric_limits<double>::infinity();
    std::vector<double> per_beam_db;
};

/// Exhaustive sweep; ties go to the lowest index. A zero channel is an outage.
template <typename Scalar>
BeamSweep optimal_beam(const ComplexVector<Scalar> &h, const CodebookT<Scalar> &cb, const LinkBudget &budget)
{
    if (cb.beams.empty())
        throw std::invalid_argument("optimal_beam: empty codebook.");
    BeamSweep out;
    out.per_beam_db.reserve(cb.beams.size());
    for (const auto &b : cb.beams)
        out.per_beam_db.push_back(beam_snr(h, b.w, budget));

    if (h.squaredNorm() == Scalar(0))
        return out;
    for (int i = 0; i < cb.size(); ++i)
        if (out.per_beam_db[i] > out.snr_db)
        {
            out.snr_db = out.per_beam_db[i];
            out.index = i;
        }
    return out;
}

} // namespace vabm

#endif // VABM_CHANNEL_HPP
