#include "wavepinn/report.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <fstream>
#include <map>

#include "wavepinn/error.hpp"

namespace wavepinn {

std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {
std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary); // LF line endings on every platform
    if (!os) throw Error(ErrorCategory::File, "cannot write file: " + path);
    return os;
}
} // namespace

void write_loss_curve(const std::string& path, const TrainHistory& history,
                      const TrainConfig& config) {
    std::ofstream os = open_out(path);
    os << "epoch,loss_total,loss_pde,loss_bc,loss_icv,loss_icd,lr\n";
    for (size_t e = 0; e < history.epochs.size(); ++e) {
        const LossBreakdown& l = history.epochs[e];
        os << (e + 1) << ',' << format_double(l.total) << ',' << format_double(l.pde) << ','
           << format_double(l.bc) << ',' << format_double(l.ic_value) << ','
           << format_double(l.ic_velocity) << ',' << format_double(lr_at(config, static_cast<int>(e)))
           << '\n';
    }
    if (!os) throw Error(ErrorCategory::File, "failed writing file: " + path);
}

void write_rel_curve(const std::string& path, const std::vector<std::pair<int, double>>& rel) {
    std::ofstream os = open_out(path);
    os << "epoch,rel\n";
    for (const auto& [epoch, value] : rel) os << epoch << ',' << format_double(value) << '\n';
    if (!os) throw Error(ErrorCategory::File, "failed writing file: " + path);
}

void write_joined_rel_curve(const std::string& path, const std::vector<std::string>& labels,
                            const std::vector<std::vector<std::pair<int, double>>>& curves) {
    if (labels.size() != curves.size())
        throw Error(ErrorCategory::InvalidArgument, "labels/curves length mismatch");
    std::ofstream os = open_out(path);
    os << "epoch";
    for (const std::string& l : labels) os << ",rel_" << l;
    os << '\n';
    std::map<int, std::vector<double>> rows;
    for (size_t c = 0; c < curves.size(); ++c)
        for (const auto& [epoch, value] : curves[c]) {
            auto& row = rows.try_emplace(epoch, curves.size(),
                                         std::numeric_limits<double>::quiet_NaN()).first->second;
            row[c] = value;
        }
    for (const auto& [epoch, row] : rows) {
        os << epoch;
        for (double v : row) os << ',' << format_double(v);
        os << '\n';
    }
    if (!os) throw Error(ErrorCategory::File, "failed writing file: " + path);
}

void write_error_grid(const std::string& path, const TestSet& test,
                      const std::vector<double>& pred) {
    if (pred.size() != test.points.size() || test.exact.size() != test.points.size())
        throw Error(ErrorCategory::InvalidArgument, "error grid needs matching pred/exact sizes");
    std::ofstream os = open_out(path);
    const int dim = test.points.empty() ? 2 : test.points.front().dim;
    os << "x1,x2";
    if (dim == 3) os << ",x3";
    os << ",t,exact,pred,abs_err\n";
    for (size_t i = 0; i < test.points.size(); ++i) {
        const SpaceTimePoint& p = test.points[i];
        for (int a = 0; a < dim; ++a) os << format_double(p.x[a]) << ',';
        os << format_double(p.t) << ',' << format_double(test.exact[i]) << ','
           << format_double(pred[i]) << ',' << format_double(std::abs(pred[i] - test.exact[i]))
           << '\n';
    }
    if (!os) throw Error(ErrorCategory::File, "failed writing file: " + path);
}

void write_summary(const std::string& path, const std::vector<std::string>& lines) {
    std::ofstream os = open_out(path);
    for (const std::string& l : lines) os << l << '\n';
    if (!os) throw Error(ErrorCategory::File, "failed writing file: " + path);
}

} // namespace wavepinn
