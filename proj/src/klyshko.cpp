#include "awp/klyshko.hpp"

#include "awp/errors.hpp"
#include "awp/parallel.hpp"

namespace awp {

void validate(const KlyshkoScene& scene) {
  if (scene.crystal.mode == CrystalMode::TwoPhotonSource)
    throw ConfigError("Klyshko scene needs a mirror crystal model");
  validate(scene.crystal);
  require_same_grid(scene.source_mode.spec(), scene.arm_back.exit_spec(), "Klyshko source mode");
  require_same_grid(scene.arm_back.entry_spec(), scene.arm_fwd.entry_spec(), "crystal plane");
}

SampledField klyshko_field(const KlyshkoScene& scene) {
  validate(scene);
  const SampledField back = arm_apply(scene.arm_back, scene.source_mode.conj(), Direction::Backward);
  SampledField out = arm_apply(scene.arm_fwd, crystal_apply(scene.crystal, back), Direction::Forward);
  out.set_plane_label("klyshko");
  return out;
}

std::vector<double> klyshko_power(const KlyshkoScene& scene) {
  if (std::holds_alternative<CameraReadout>(scene.readout))
    throw ConfigError("power readout requested on a camera scene");
  const SampledField field = klyshko_field(scene);
  if (const auto* pm = std::get_if<PowerMeterReadout>(&scene.readout)) return {mmf_power(field, pm->pose)};
  const auto& poses = std::get<ScanningFiberReadout>(scene.readout).poses;
  std::vector<double> out(poses.size());
  parallel_for(poses.size(), [&](std::size_t i) { out[i] = detector_power(field, poses[i]); });
  return out;
}

std::vector<double> klyshko_image(const KlyshkoScene& scene) {
  if (!std::holds_alternative<CameraReadout>(scene.readout))
    throw ConfigError("image requested on a fiber readout");
  return klyshko_field(scene).intensity();
}

}  // namespace awp
