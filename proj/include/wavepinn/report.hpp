#pragma once

#include <string>
#include <vector>

#include "wavepinn/geometry.hpp"
#include "wavepinn/train.hpp"

namespace wavepinn {

/// Shortest round-trip decimal formatting, locale-independent.
std::string format_double(double v);

/// loss_curve.csv: epoch,loss_total,loss_pde,loss_bc,loss_icv,loss_icd,lr
void write_loss_curve(const std::string& path, const TrainHistory& history,
                      const TrainConfig& config);

/// rel_curve.csv: epoch,rel
void write_rel_curve(const std::string& path, const std::vector<std::pair<int, double>>& rel);

/// Joined REL curves, one column per labelled run (all on one epoch axis).
void write_joined_rel_curve(const std::string& path, const std::vector<std::string>& labels,
                            const std::vector<std::vector<std::pair<int, double>>>& curves);

/// error_grid.csv: x1,x2[,x3],t,exact,pred,abs_err
void write_error_grid(const std::string& path, const TestSet& test,
                      const std::vector<double>& pred);

void write_summary(const std::string& path, const std::vector<std::string>& lines);

} // namespace wavepinn
