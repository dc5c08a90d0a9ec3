#pragma once

#include <string>
#include <vector>

#include "gts/net.hpp"
#include "gts/pipeline.hpp"

namespace gts {

/// A deviation transition and the base transition it competes with. Both
/// ids refer to the transformed model of the fixture's combined cell.
struct ChoicePoint {
  std::string application_id;
  std::string deviation;
  std::string competitor;
};

struct Fixture {
  std::string name;
  Net m0;
  GridSpec grid;
  std::vector<ChoicePoint> choice_points;
};

std::vector<std::string> fixture_names();

/// Throws UnknownFixture for names outside fixture_names().
Fixture fixture(const std::string& name);

Net package_delivery_net();
Net energy_contract_net();
Net assembly_net();

}  // namespace gts
