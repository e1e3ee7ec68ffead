#pragma once

#include <string>
#include <vector>

#include "sideslip/hybrid/hybrid.hpp"
#include "sideslip/mlp/train.hpp"
#include "sideslip/vehicle/vehicle.hpp"

namespace sideslip::io {

/// Serialized observer: topology, weights, standardizer, the vehicle
/// parameters the prior was computed with, a training-config echo and a
/// content hash of the training set. Stored as a line-oriented text document
/// with shortest-round-trip numbers, so write/read is lossless.
struct ModelFile {
  int format_version = 1;
  mlp::MlpTopology topology;
  mlp::MlpWeights weights;
  hybrid::Standardizer standardizer;
  std::vector<std::string> channel_order;
  mlp::TrainConfig train_config;
  vehicle::VehicleParams params;
  std::string train_fingerprint;
};

void write_model(const std::string& path, const ModelFile& model);

/// Strict reader; raises SchemaError on version/grammar problems and
/// ShapeError (naming the layer) when array sizes disagree with the declared
/// topology.
ModelFile read_model(const std::string& path);

/// FNV-1a over the raw bytes of the training arrays; stored in the model
/// file to identify what a model was fitted on.
std::string fingerprint_training_set(const mlp::TrainingSet& set);

}  // namespace sideslip::io
