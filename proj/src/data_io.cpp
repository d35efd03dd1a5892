#include "ssl_lab/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "ssl_lab/rng.hpp"

namespace ssllab {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line, char sep = ',') {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        fields.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return fields;
}

bool try_parse(std::string_view text, double& out) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    if (text.empty()) return false;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc() && ptr == text.data() + text.size();
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    return out;
}

const char* const kResultsHeader =
    "axis_name,axis_value,method,replicates,mean_excess,std_excess,mean_estimation,std_estimation,"
    "mean_test_error,std_test_error,extra";

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw std::runtime_error("format_double failed");
    return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
    double v = 0.0;
    if (!try_parse(text, v)) throw std::invalid_argument("not a number: '" + std::string(text) + "'");
    return v;
}

TabularDataset load_csv(const std::filesystem::path& path, const std::string& label_column,
                        const std::string& positive_label) {
    std::ifstream in = open_input(path);
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (header.empty() && std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        for (auto f : split_fields(line)) header.emplace_back(f);
    }
    if (header.empty()) throw std::invalid_argument("'" + path.string() + "' has no header row");
    const auto label_it = std::find(header.begin(), header.end(), label_column);
    if (label_it == header.end()) {
        throw std::invalid_argument("label column '" + label_column + "' not found in '" + path.string() + "'");
    }
    const auto label_idx = static_cast<std::size_t>(label_it - header.begin());

    TabularDataset data;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (j != label_idx) data.columns.push_back(header[j]);
    }
    const std::size_t d = data.columns.size();
    std::vector<double> values;
    std::vector<std::string> labels;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != header.size()) {
            throw std::invalid_argument("row " + std::to_string(line_no) + ": expected " +
                                        std::to_string(header.size()) + " fields, got " +
                                        std::to_string(fields.size()));
        }
        for (std::size_t j = 0; j < fields.size(); ++j) {
            if (j == label_idx) continue;
            double v = 0.0;
            if (!try_parse(fields[j], v) || !std::isfinite(v)) {
                throw std::invalid_argument("row " + std::to_string(line_no) + ", column '" + header[j] +
                                            "': not a finite number ('" + std::string(fields[j]) + "')");
            }
            values.push_back(v);
        }
        labels.emplace_back(fields[label_idx]);
    }

    std::vector<std::string> distinct;
    for (const auto& l : labels) {
        if (std::find(distinct.begin(), distinct.end(), l) == distinct.end()) distinct.push_back(l);
    }
    if (distinct.size() < 2) throw std::invalid_argument("label column needs 2 distinct values, found " +
                                                         std::to_string(distinct.size()));
    if (distinct.size() > 2) throw std::invalid_argument("label column has more than 2 distinct values");
    if (std::find(distinct.begin(), distinct.end(), positive_label) == distinct.end()) {
        throw std::invalid_argument("positive label '" + positive_label + "' does not occur in the label column");
    }

    const auto n = static_cast<Eigen::Index>(labels.size());
    data.x.resize(n, static_cast<Eigen::Index>(d));
    data.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            data.x(i, static_cast<Eigen::Index>(j)) = values[static_cast<std::size_t>(i) * d + j];
        }
        data.y(i) = labels[static_cast<std::size_t>(i)] == positive_label ? 1.0 : -1.0;
    }
    data.provenance = path.string();
    return data;
}

void save_csv(const TabularDataset& data, const std::filesystem::path& path, const std::string& label_column) {
    std::ofstream out = open_output(path);
    for (const auto& c : data.columns) out << c << ',';
    out << label_column << '\n';
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        for (Eigen::Index j = 0; j < data.dim(); ++j) out << format_double(data.x(i, j)) << ',';
        out << (data.y(i) > 0 ? "1" : "-1") << '\n';
    }
    if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

Matrix ColumnScaling::apply(const Matrix& x) const {
    if (x.cols() != mean.size()) throw std::invalid_argument("ColumnScaling::apply: column count mismatch");
    return (x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

Matrix ColumnScaling::invert(const Matrix& z) const {
    if (z.cols() != mean.size()) throw std::invalid_argument("ColumnScaling::invert: column count mismatch");
    return (z.array().rowwise() * scale.transpose().array()).matrix().rowwise() + mean.transpose();
}

std::pair<TabularDataset, ColumnScaling> standardize(const TabularDataset& data) {
    if (data.size() < 2) throw std::invalid_argument("standardize needs at least 2 rows");
    ColumnScaling scaling;
    const auto n = static_cast<double>(data.size());
    scaling.mean = data.x.colwise().mean().transpose();
    scaling.scale.resize(data.dim());
    scaling.constant.assign(static_cast<std::size_t>(data.dim()), false);
    for (Eigen::Index j = 0; j < data.dim(); ++j) {
        const double sd = std::sqrt((data.x.col(j).array() - scaling.mean(j)).square().sum() / n);
        const bool constant = !(sd > 1e-12 * std::max(1.0, std::abs(scaling.mean(j))));
        scaling.constant[static_cast<std::size_t>(j)] = constant;
        scaling.scale(j) = constant ? 1.0 : sd;
    }
    TabularDataset out = data;
    out.x = scaling.apply(data.x);
    return {std::move(out), std::move(scaling)};
}

Matrix PcaModel::project(const Matrix& x) const {
    if (x.cols() != mean.size()) throw std::invalid_argument("PcaModel::project: column count mismatch");
    return (x.rowwise() - mean.transpose()) * components;
}

Matrix PcaModel::reconstruct(const Matrix& scores) const {
    if (scores.cols() != components.cols()) throw std::invalid_argument("PcaModel::reconstruct: width mismatch");
    return (scores * components.transpose()).rowwise() + mean.transpose();
}

PcaModel pca_fit(const Matrix& x, Eigen::Index k, const SolverParams& params) {
    const Eigen::Index d = x.cols();
    if (k < 1 || k > d) throw std::invalid_argument("pca: need 1 <= k <= d");
    if (x.rows() < 2) throw std::invalid_argument("pca: need at least 2 rows");
    PcaModel model;
    model.mean = x.colwise().mean().transpose();
    const Matrix centered = x.rowwise() - model.mean.transpose();
    Matrix cov = centered.transpose() * centered / static_cast<double>(x.rows() - 1);
    const double scale = std::max(cov.trace(), std::numeric_limits<double>::min());
    model.components.resize(d, k);
    model.variances.resize(k);

    for (Eigen::Index c = 0; c < k; ++c) {
        SolverParams p = params;
        p.seed = derive_seed(params.seed, static_cast<std::uint64_t>(c));
        const EigenPair pair = leading_eigenpair(cov, p);
        Vector v = pair.v;
        double lambda = pair.lambda;
        if (!(lambda > 1e-12 * scale)) {
            // Remaining spectrum is numerically zero; complete the basis.
            lambda = 0.0;
            v.setZero();
            for (Eigen::Index e = 0; e < d; ++e) {
                Vector cand = Vector::Unit(d, e);
                for (Eigen::Index prev = 0; prev < c; ++prev) {
                    cand -= model.components.col(prev).dot(cand) * model.components.col(prev);
                }
                if (cand.norm() > 1e-6) {
                    v = cand;
                    break;
                }
            }
        }
        for (int pass = 0; pass < 2; ++pass) {
            for (Eigen::Index prev = 0; prev < c; ++prev) {
                v -= model.components.col(prev).dot(v) * model.components.col(prev);
            }
        }
        v.normalize();
        model.components.col(c) = v;
        model.variances(c) = lambda;
        cov -= lambda * v * v.transpose();
    }
    return model;
}

TabularDataset pca_project(const TabularDataset& data, Eigen::Index k, double tol, std::size_t max_iter,
                           std::uint64_t seed) {
    const PcaModel model = pca_fit(data.x, k, SolverParams{tol, max_iter, seed});
    TabularDataset out;
    out.x = model.project(data.x);
    out.y = data.y;
    for (Eigen::Index c = 0; c < k; ++c) out.columns.push_back("pc" + std::to_string(c + 1));
    out.provenance = data.provenance + " | pca k=" + std::to_string(k);
    return out;
}

DataSplit split(const TabularDataset& data, const SplitSpec& spec) {
    const Eigen::Index n = data.size();
    if (spec.n_l < 0 || spec.n_val < 0 || spec.n_test < 0) {
        throw std::invalid_argument("split: counts must be nonnegative");
    }
    if (spec.n_l + spec.n_val + spec.n_test > n) {
        throw std::invalid_argument("split: n_l + n_val + n_test = " +
                                    std::to_string(spec.n_l + spec.n_val + spec.n_test) + " exceeds " +
                                    std::to_string(n) + " rows");
    }
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    Rng rng(spec.seed);
    for (std::size_t i = perm.size(); i > 1; --i) {
        std::swap(perm[i - 1], perm[rng.below(i)]);
    }

    DataSplit out;
    auto take = [&](std::size_t from, std::size_t count) {
        return std::vector<Eigen::Index>(perm.begin() + static_cast<std::ptrdiff_t>(from),
                                         perm.begin() + static_cast<std::ptrdiff_t>(from + count));
    };
    const auto nl = static_cast<std::size_t>(spec.n_l);
    const auto nv = static_cast<std::size_t>(spec.n_val);
    const auto nt = static_cast<std::size_t>(spec.n_test);
    out.labeled_rows = take(0, nl);
    out.validation_rows = take(nl, nv);
    out.test_rows = take(nl + nv, nt);
    out.unlabeled_rows = take(nl + nv + nt, perm.size() - nl - nv - nt);

    auto rows = [&](const std::vector<Eigen::Index>& idx) {
        Matrix m(static_cast<Eigen::Index>(idx.size()), data.dim());
        for (std::size_t i = 0; i < idx.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = data.x.row(idx[i]);
        return m;
    };
    auto labels = [&](const std::vector<Eigen::Index>& idx) {
        Vector y(static_cast<Eigen::Index>(idx.size()));
        for (std::size_t i = 0; i < idx.size(); ++i) y(static_cast<Eigen::Index>(i)) = data.y(idx[i]);
        return y;
    };
    out.labeled = LabeledDataset(rows(out.labeled_rows), labels(out.labeled_rows));
    out.validation = UnlabeledDataset(rows(out.validation_rows));
    out.test = LabeledDataset(rows(out.test_rows), labels(out.test_rows));
    out.unlabeled = UnlabeledDataset(rows(out.unlabeled_rows));
    return out;
}

void write_results(const SweepResult& sweep, const std::filesystem::path& path) {
    if (sweep.axis.find_first_of(" ,\n") != std::string::npos) {
        throw std::invalid_argument("axis name must not contain spaces, commas or newlines");
    }
    std::ostringstream out;
    out << "# schema=" << kResultsSchema << " axis=" << sweep.axis << '\n' << kResultsHeader << '\n';
    for (const SweepCell& cell : sweep.cells) {
        for (const MethodStats& m : cell.methods) {
            out << sweep.axis << ',' << format_double(cell.axis_value) << ',' << method_name(m.method) << ','
                << m.replicates << ',' << format_double(m.mean_excess) << ',' << format_double(m.std_excess) << ','
                << format_double(m.mean_estimation) << ',' << format_double(m.std_estimation) << ','
                << format_double(m.mean_test_error) << ',' << format_double(m.std_test_error) << ',';
            bool first = true;
            for (const auto& [key, value] : m.extra) {
                if (key.find_first_of("=;,\n") != std::string::npos) {
                    throw std::invalid_argument("extra key '" + key + "' contains a reserved character");
                }
                out << (first ? "" : ";") << key << '=' << format_double(value);
                first = false;
            }
            out << '\n';
        }
    }
    std::ofstream file = open_output(path);
    file << out.str();
    if (!file) throw std::runtime_error("write to '" + path.string() + "' failed");
}

SweepResult read_results(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# schema=", 0) != 0) {
        throw std::runtime_error("'" + path.string() + "' is not a results file (missing schema line)");
    }
    std::istringstream meta(line.substr(2));
    std::string token;
    std::string schema;
    SweepResult sweep;
    while (meta >> token) {
        if (token.rfind("schema=", 0) == 0) schema = token.substr(7);
        if (token.rfind("axis=", 0) == 0) sweep.axis = token.substr(5);
    }
    if (schema != kResultsSchema) {
        throw std::runtime_error("results schema '" + schema + "' is not supported (expected '" + kResultsSchema +
                                 "')");
    }
    if (!std::getline(in, line) || trim(line) != kResultsHeader) {
        throw std::runtime_error("'" + path.string() + "' has an unexpected header");
    }
    std::size_t line_no = 2;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto f = split_fields(line);
        const std::string where = path.string() + ":" + std::to_string(line_no);
        if (f.size() != 11) throw std::runtime_error(where + ": expected 11 fields");
        try {
            MethodStats m;
            const double axis_value = parse_double(f[1]);
            m.method = parse_method(f[2]);
            m.replicates = static_cast<std::size_t>(parse_double(f[3]));
            m.mean_excess = parse_double(f[4]);
            m.std_excess = parse_double(f[5]);
            m.mean_estimation = parse_double(f[6]);
            m.std_estimation = parse_double(f[7]);
            m.mean_test_error = parse_double(f[8]);
            m.std_test_error = parse_double(f[9]);
            if (!f[10].empty()) {
                for (auto kv : split_fields(f[10], ';')) {
                    const auto eq = kv.find('=');
                    if (eq == std::string_view::npos) throw std::invalid_argument("bad extra entry");
                    m.extra[std::string(kv.substr(0, eq))] = parse_double(kv.substr(eq + 1));
                }
            }
            if (sweep.axis.empty()) sweep.axis = std::string(f[0]);
            const bool new_cell =
                sweep.cells.empty() || sweep.cells.back().axis_value != axis_value ||
                std::any_of(sweep.cells.back().methods.begin(), sweep.cells.back().methods.end(),
                            [&](const MethodStats& s) { return s.method == m.method; });
            if (new_cell) sweep.cells.push_back(SweepCell{axis_value, {}});
            sweep.cells.back().methods.push_back(std::move(m));
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(where + ": " + e.what());
        }
    }
    return sweep;
}

}  // namespace ssllab
