#pragma once

#include <memory>
#include <vector>

#include "drd/nn/layers.hpp"

namespace drd::nn {

/// Intermediate values of one rain residual block, kept for inspection.
struct RrbTrace {
  Tensor branch;  // residual branch output before gating
  Tensor gate;    // SE gate, (N, M, 1, 1)
};

/// out = x + SE(BN(conv(PReLU(BN(conv(x)))))); the gate scales only the
/// residual branch.
class RainResidualBlock : public Module {
 public:
  RainResidualBlock(std::int64_t channels, std::int64_t se_reduction);

  Tensor forward(const Tensor& x, RrbTrace* trace = nullptr);

  Conv2d conv1;
  BatchNorm2d bn1;
  PReLU act;
  Conv2d conv2;
  BatchNorm2d bn2;
  SEUnit se;

 protected:
  std::vector<std::pair<std::string, Module*>> children() override;
};

/// Parallel dilated 3x3 convolutions, channel-concatenated and fused back to
/// M channels by a 1x1 convolution.
class DCCL : public Module {
 public:
  DCCL(std::int64_t channels, const std::vector<int>& dilations);

  Tensor forward(const Tensor& x) const;

  const std::vector<std::unique_ptr<Conv2d>>& branches() const { return branches_; }
  Conv2d& fuse() { return fuse_; }

 protected:
  std::vector<std::pair<std::string, Module*>> children() override;

 private:
  std::vector<std::unique_ptr<Conv2d>> branches_;
  Conv2d fuse_;
};

/// out = x + BN(DCCL2(PReLU(BN(DCCL1(x))))).
class SDCAB : public Module {
 public:
  SDCAB(std::int64_t channels, const std::vector<int>& dilations);

  Tensor forward(const Tensor& x);

  DCCL dccl1;
  BatchNorm2d bn1;
  PReLU act;
  DCCL dccl2;
  BatchNorm2d bn2;

 protected:
  std::vector<std::pair<std::string, Module*>> children() override;
};

}  // namespace drd::nn
