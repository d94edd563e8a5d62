#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "stark/errors.hpp"

namespace stark {

// Occupation-number configuration of an L-site chain.
using FockState = std::vector<int>;

inline std::string to_string(const FockState& s) {
    std::string out;
    out.reserve(s.size());
    for (int n : s) {
        if (n > 9) {
            out += '(' + std::to_string(n) + ')';
        } else {
            out += static_cast<char>('0' + n);
        }
    }
    return out;
}

/// Ordered enumeration of every Fock state in a fixed particle-number sector.
///
/// States are sorted in ascending lexicographic order on occupation tuples
/// (site 0 most significant).  The object is immutable after construction and
/// safe for concurrent reads.
class SectorBasis {
  public:
    SectorBasis(int num_sites, int num_particles, int max_occ)
        : num_sites_(num_sites), num_particles_(num_particles), max_occ_(max_occ) {
        if (num_sites < 1) {
            throw ParameterError("SectorBasis: need at least one site");
        }
        if (max_occ < 1) {
            throw ParameterError("SectorBasis: max_occ must be >= 1");
        }
        if (num_particles < 0 ||
            static_cast<long long>(num_particles) >
                static_cast<long long>(num_sites) * max_occ) {
            throw ParameterError("SectorBasis: particle number " + std::to_string(num_particles) +
                                 " exceeds capacity of " + std::to_string(num_sites) +
                                 " sites with cap " + std::to_string(max_occ));
        }
        FockState scratch(static_cast<std::size_t>(num_sites), 0);
        enumerate(scratch, 0, num_particles);
    }

    int num_sites() const { return num_sites_; }
    int num_particles() const { return num_particles_; }
    int max_occ() const { return max_occ_; }
    bool is_spin_sector() const { return max_occ_ == 1; }

    std::size_t dimension() const { return states_.size(); }
    const std::vector<FockState>& states() const { return states_; }
    const FockState& state(std::size_t k) const { return states_[k]; }

    /// Ordinal of `s` in the sector; exact roundtrip with state().
    std::size_t index_of(const FockState& s) const {
        auto it = std::lower_bound(states_.begin(), states_.end(), s);
        if (it == states_.end() || *it != s) {
            throw LookupError("index_of: state " + stark::to_string(s) +
                              " is not a member of the sector");
        }
        return static_cast<std::size_t>(it - states_.begin());
    }

    bool contains(const FockState& s) const {
        auto it = std::lower_bound(states_.begin(), states_.end(), s);
        return it != states_.end() && *it == s;
    }

  private:
    // Recursion over sites, low occupation first, yields ascending
    // lexicographic order without a final sort.
    void enumerate(FockState& scratch, int site, int remaining) {
        if (site == num_sites_ - 1) {
            if (remaining <= max_occ_) {
                scratch[static_cast<std::size_t>(site)] = remaining;
                states_.push_back(scratch);
            }
            return;
        }
        const int hi = std::min(max_occ_, remaining);
        for (int n = 0; n <= hi; ++n) {
            scratch[static_cast<std::size_t>(site)] = n;
            enumerate(scratch, site + 1, remaining - n);
        }
    }

    int num_sites_;
    int num_particles_;
    int max_occ_;
    std::vector<FockState> states_;
};

/// Bosonic sector with a per-site occupancy cap.
inline SectorBasis enumerate_boson_sector(int num_sites, int num_particles, int max_occ) {
    return SectorBasis(num_sites, num_particles, max_occ);
}

/// Hard-core (spin-1/2) sector; same ordering as the bosonic enumeration with
/// max_occ = 1.
inline SectorBasis enumerate_spin_sector(int num_sites, int num_up) {
    if (num_up > num_sites) {
        throw ParameterError("enumerate_spin_sector: more up spins than sites");
    }
    return SectorBasis(num_sites, num_up, 1);
}

/// Splits a state across the bond left of site `cut`; left fragment has
/// `cut` sites.  Concatenation of the fragments reproduces the input.
inline std::pair<FockState, FockState> bipartition_split(const FockState& s, int cut) {
    const int L = static_cast<int>(s.size());
    if (cut <= 0 || cut >= L) {
        throw ParameterError("bipartition_split: cut must lie strictly inside the chain");
    }
    return {FockState(s.begin(), s.begin() + cut), FockState(s.begin() + cut, s.end())};
}

inline int particle_number(const FockState& s) {
    return std::accumulate(s.begin(), s.end(), 0);
}

}  // namespace stark
