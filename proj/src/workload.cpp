#include "vcachesim/workload.hpp"

#include <algorithm>
#include <cmath>

#include "vcachesim/errors.hpp"

namespace vcsim {

TenantWorkload::TenantWorkload(std::vector<CatalogObject> catalog, double zipfAlpha,
                               double rateRps, double personalizedFraction,
                               std::uint64_t arrivalSeed, std::uint64_t contentSeed)
    : catalog_(std::move(catalog)), rateRps_(rateRps), personalizedFraction_(personalizedFraction),
      arrivalRng_(arrivalSeed), contentRng_(contentSeed) {
    if (catalog_.empty()) return;
    cdf_.reserve(catalog_.size());
    double acc = 0.0;
    for (std::size_t r = 0; r < catalog_.size(); ++r) {
        acc += std::pow(static_cast<double>(r + 1), -zipfAlpha);
        cdf_.push_back(acc);
    }
    for (double& c : cdf_) c /= acc;
    cdf_.back() = 1.0;
}

TenantWorkload::Draw TenantWorkload::sample() {
    if (catalog_.empty()) throw SimError("sampling from an empty catalog");
    // one uniform for the rank, one for the personalization coin; the draw
    // count per sample is fixed so streams stay aligned across config variants
    double u = contentRng_.uniform();
    double coin = contentRng_.uniform();
    std::size_t rank = static_cast<std::size_t>(
        std::lower_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
    if (rank >= catalog_.size()) rank = catalog_.size() - 1;
    const CatalogObject& obj = catalog_[rank];
    Draw d;
    d.rank = rank;
    d.id = obj.id;
    d.bytes = obj.bytes;
    d.cacheable = !obj.personalizedDestination && coin >= personalizedFraction_;
    return d;
}

double TenantWorkload::rankProbability(std::size_t rank) const {
    if (rank >= cdf_.size()) return 0.0;
    return rank == 0 ? cdf_[0] : cdf_[rank] - cdf_[rank - 1];
}

}  // namespace vcsim
