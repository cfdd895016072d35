#pragma once

#include <json.hpp>

#include <string>
#include <vector>

namespace biharm::golden {

struct GoldenResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Warped product of the half-plane (x, y > 0) with a line, fiber metric C·y⁴ dt².
nlohmann::json quartic_warping_manifest(double c = 1.0);

GoldenResult cylindrical_example();
GoldenResult quartic_warping();
GoldenResult perturbation_sensitivity();
GoldenResult riccati_families();
GoldenResult product_warpings();
GoldenResult identity_suite();
GoldenResult integrability_coherence();
GoldenResult autodiff_agreement();
GoldenResult determinism();

/// Every check above, in id order. Exceptions are caught and reported as failures.
std::vector<GoldenResult> run_golden();

} // namespace biharm::golden
