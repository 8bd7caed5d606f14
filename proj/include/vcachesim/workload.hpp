#pragma once

#include <cstdint>
#include <vector>

#include "vcachesim/rng.hpp"
#include "vcachesim/types.hpp"

namespace vcsim {

struct CatalogObject {
    ContentId id;
    std::uint64_t bytes = 0;
    bool personalizedDestination = false;  // whole destination serves personalized content
};

// Zipf(alpha) popularity over a rank-ordered catalog, open-loop Poisson
// arrivals. Draw sequences depend only on the seeds, never on simulation
// state, so paired runs see identical workloads.
class TenantWorkload {
public:
    TenantWorkload() = default;
    TenantWorkload(std::vector<CatalogObject> catalog, double zipfAlpha, double rateRps,
                   double personalizedFraction, std::uint64_t arrivalSeed,
                   std::uint64_t contentSeed);

    bool active() const { return rateRps_ > 0.0 && !catalog_.empty(); }
    double rateRps() const { return rateRps_; }
    std::size_t catalogSize() const { return catalog_.size(); }
    const std::vector<CatalogObject>& catalog() const { return catalog_; }

    SimTime nextArrivalGap() { return arrivalRng_.exponential(rateRps_); }

    struct Draw {
        std::size_t rank = 0;
        ContentId id;
        std::uint64_t bytes = 0;
        bool cacheable = true;
    };
    Draw sample();

    // analytic pmf of rank r (0-based); the tests' chi-square oracle
    double rankProbability(std::size_t rank) const;

private:
    std::vector<CatalogObject> catalog_;
    std::vector<double> cdf_;
    double rateRps_ = 0.0;
    double personalizedFraction_ = 0.0;
    Rng arrivalRng_;
    Rng contentRng_;
};

}  // namespace vcsim
