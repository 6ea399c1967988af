#pragma once

// Brute-force simulator of the linear-optics circuits in a truncated,
// sparse Fock basis. It shares no arithmetic with the closed-form
// distributions and is used to validate them on small photon numbers.

#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "diqkd/types.hpp"

namespace diqkd::oracle {

enum class Pol : std::uint8_t { h = 0, v = 1 };

struct ModeIndex {
    std::string spatial;
    Pol pol = Pol::h;
    auto operator<=>(const ModeIndex&) const = default;
    std::string to_string() const;
};

/// Ordered registry of modes, fixed when a circuit is built. Every spatial
/// label carries both polarizations; modes are sorted by label, then h < v.
class ModeSet {
  public:
    explicit ModeSet(std::vector<std::string> spatial_labels);
    int index(const ModeIndex& mode) const;
    bool contains(const ModeIndex& mode) const;
    int size() const { return static_cast<int>(modes_.size()); }
    const std::vector<ModeIndex>& modes() const { return modes_; }

  private:
    std::vector<ModeIndex> modes_;
};

using Occupation = std::vector<std::uint8_t>;

struct OracleOptions {
    /// Amplitudes with magnitude below the threshold are dropped after each
    /// circuit element. Disable for validation runs that need every term.
    bool prune = true;
    double prune_threshold = 1e-15;
};

class FockState {
  public:
    FockState(std::shared_ptr<const ModeSet> modes, int truncation);

    static FockState vacuum(std::shared_ptr<const ModeSet> modes);

    const ModeSet& modes() const { return *modes_; }
    std::shared_ptr<const ModeSet> mode_set() const { return modes_; }
    int truncation() const { return truncation_; }
    const std::map<Occupation, std::complex<double>>& amplitudes() const { return amplitudes_; }
    std::map<Occupation, std::complex<double>>& amplitudes() { return amplitudes_; }

    std::complex<double> amplitude(const Occupation& occ) const;
    double norm_squared() const;

  private:
    std::shared_ptr<const ModeSet> modes_;
    int truncation_ = 0;
    std::map<Occupation, std::complex<double>> amplitudes_;
};

enum class PairForm {
    /// (a_h b_v - a_v b_h)^n / (n! sqrt(n+1)) |0>
    singlet,
    /// (a b)^n / n! |0> on the first mode of each pair
    twin,
};

/// Normalized n-pair state on modes a = (a_h, a_v) and b = (b_h, b_v).
/// Rejects a truncation bound smaller than 2n.
FockState build_pair_state(int n, const std::pair<ModeIndex, ModeIndex>& a,
                           const std::pair<ModeIndex, ModeIndex>& b,
                           std::shared_ptr<const ModeSet> modes, int truncation,
                           PairForm form = PairForm::singlet);

/// Normalized product of number states, one count per listed mode.
FockState build_number_state(const std::vector<std::pair<ModeIndex, int>>& counts,
                             std::shared_ptr<const ModeSet> modes);

/// Product of two states living on disjoint modes of the same mode set.
FockState tensor_product(const FockState& x, const FockState& y);

/// Beamsplitter on two modes: x -> sqrt(T) x + sqrt(1-T) y and
/// y -> sqrt(T) y - sqrt(1-T) x (creation operators). With y in vacuum this
/// is the loss element; with T = 1/2 it is the balanced splitter
/// x -> (x + y)/sqrt2, y -> (y - x)/sqrt2.
FockState apply_bs(const FockState& state, const ModeIndex& x, const ModeIndex& y,
                   double transmittance, const OracleOptions& options = {});

/// Same beamsplitter applied to both polarizations of two spatial modes.
FockState apply_bs(const FockState& state, const std::string& x, const std::string& y,
                   double transmittance, const OracleOptions& options = {});

/// Polarization rotation: h -> cos h + sin v, v -> cos v - sin h.
FockState apply_rotation(const FockState& state, const std::string& spatial, double theta,
                         const OracleOptions& options = {});

/// Photon-number-resolving projection on the listed modes; the remaining
/// modes are traced out. Returns the pattern distribution in list order.
CondDistribution measure_pnr(const FockState& state, const std::vector<ModeIndex>& detector_modes);

/// Full circuit for an architecture conditioned on the source photon
/// numbers, measured on the architecture's detector layout (no dark counts).
///   esr: (n, n'), pqa: (n, n1, n2), two_esr: (n1, n2, n3), unassisted: (n)
CondDistribution oracle_cond_distribution(Architecture arch, const std::vector<int>& counts,
                                          const CircuitParams& params, double theta_a,
                                          double theta_b, const OracleOptions& options = {});

}  // namespace diqkd::oracle
