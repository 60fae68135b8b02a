#pragma once

#include <variant>
#include <vector>

#include "awp/detection.hpp"
#include "awp/spdc.hpp"

namespace awp {

struct CameraReadout {};

/// Multimode fiber feeding a power meter; pose.size is the core diameter.
struct PowerMeterReadout {
  DetectorPose pose;
};

struct ScanningFiberReadout {
  std::vector<DetectorPose> poses;
};

using Readout = std::variant<CameraReadout, PowerMeterReadout, ScanningFiberReadout>;

/// Classical advanced-wave setup: a laser launched from the fixed fiber
/// runs backward through arm_back, reflects at the crystal plane and
/// returns forward through arm_fwd to the readout plane.
struct KlyshkoScene {
  SampledField source_mode;  ///< fiber mode on arm_back's exit grid
  OpticalArm arm_back;
  OpticalArm arm_fwd;
  CrystalKernel crystal = perfect_mirror();
  Readout readout = CameraReadout{};
};

/// Throws ConfigError for a TwoPhotonSource crystal and ShapeError when the
/// source mode or the two arm entries do not share the expected grids.
void validate(const KlyshkoScene& scene);

SampledField klyshko_field(const KlyshkoScene& scene);

/// One power per pose (a single value for PowerMeterReadout). Throws
/// ConfigError for a camera readout.
std::vector<double> klyshko_power(const KlyshkoScene& scene);

/// |field|^2 on the arm_fwd exit grid. Throws ConfigError unless the
/// readout is a camera.
std::vector<double> klyshko_image(const KlyshkoScene& scene);

}  // namespace awp
