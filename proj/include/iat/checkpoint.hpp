#pragma once

#include "iat/act2act.hpp"
#include "iat/pe.hpp"
#include "iat/pvae.hpp"

#include <string>

namespace iat::ckpt {

// Self-describing JSON containers: architecture descriptor, training config,
// every named parameter with its shape, and (for PVAEs) the fitted
// projections. Loading validates the kind marker, the architecture, and that
// the parameter sets match exactly; any mismatch raises with the path.

struct PvaeCheckpoint {
  pvae::VaeArch arch;
  pvae::PvaeTrainConfig config;
  pvae::PvaePair pair;
  pe::PcaProjection p_s, p_r;
};

void save_pvae(const pvae::PvaeResult& r, const pvae::PvaeTrainConfig& config,
               const std::string& path);
PvaeCheckpoint load_pvae(const std::string& path);

struct GanCheckpoint {
  gan::GanArch arch;
  gan::GanConfig config;
  gan::Act2ActModel model;
};

void save_gan(const gan::GanResult& r, const gan::GanConfig& config,
              const std::string& path);
GanCheckpoint load_gan(const std::string& path);

}  // namespace iat::ckpt
