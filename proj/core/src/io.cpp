#include "d2pc/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

namespace d2pc {

namespace {

constexpr int kFullPrecision = 17;  // round-trips any double

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, sep)) out.push_back(field);
  return out;
}

double parse_double(const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FileError("malformed number '" + s + "'");
  }
}

int parse_int(const std::string& s) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FileError("malformed integer '" + s + "'");
  }
}

} // namespace

const char* qp_status_name(QpStatus s) {
  switch (s) {
    case QpStatus::Solved: return "solved";
    case QpStatus::MaxIterations: return "max_iterations";
    case QpStatus::Failure: return "failure";
  }
  return "?";
}

void write_episode_csv(const EpisodeData& ep, std::ostream& os) {
  const Eigen::Index m = ep.inputs.rows();
  const Eigen::Index p = ep.outputs.rows();
  os << "# episode m=" << m << " p=" << p << " offset=" << ep.initial_offset
     << "\n";
  os << "t";
  for (Eigen::Index i = 0; i < m; ++i) os << ",u_" << (i + 1);
  for (Eigen::Index i = 0; i < p; ++i) os << ",y_" << (i + 1);
  os << "\n";
  const auto precision = os.precision(kFullPrecision);
  for (Eigen::Index k = 0; k < ep.inputs.cols(); ++k) {
    os << (k - ep.initial_offset);
    for (Eigen::Index i = 0; i < m; ++i) os << "," << ep.inputs(i, k);
    for (Eigen::Index i = 0; i < p; ++i) os << "," << ep.outputs(i, k);
    os << "\n";
  }
  os.precision(precision);
}

EpisodeData read_episode_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# episode ", 0) != 0) {
    throw FileError("episode file missing header");
  }
  int m = -1, p = -1, offset = -1;
  for (const auto& tok : split(line.substr(2), ' ')) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = tok.substr(0, eq);
    const std::string val = tok.substr(eq + 1);
    if (key == "m") m = parse_int(val);
    if (key == "p") p = parse_int(val);
    if (key == "offset") offset = parse_int(val);
  }
  if (m < 1 || p < 1 || offset < 0) {
    throw FileError("episode header is incomplete");
  }
  if (!std::getline(is, line)) throw FileError("episode file truncated");

  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split(line, ',');
    if (static_cast<int>(fields.size()) != 1 + m + p) {
      throw FileError("episode row has wrong field count");
    }
    std::vector<double> row;
    row.reserve(fields.size() - 1);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      row.push_back(parse_double(fields[i]));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FileError("episode file has no samples");

  EpisodeData ep;
  ep.initial_offset = offset;
  ep.inputs.resize(m, static_cast<Eigen::Index>(rows.size()));
  ep.outputs.resize(p, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (int i = 0; i < m; ++i) {
      ep.inputs(i, static_cast<Eigen::Index>(k)) = rows[k][static_cast<std::size_t>(i)];
    }
    for (int i = 0; i < p; ++i) {
      ep.outputs(i, static_cast<Eigen::Index>(k)) =
          rows[k][static_cast<std::size_t>(m + i)];
    }
  }
  return ep;
}

void write_trajectory_csv(const Trajectory& traj, const Matrix* y_nom,
                          std::ostream& os) {
  const Eigen::Index p = traj.reference.rows();
  const Eigen::Index m = traj.inputs.rows();
  os << "# trajectory steps=" << traj.steps_completed
     << " failed=" << (traj.failed ? 1 : 0) << "\n";
  os << "t";
  for (Eigen::Index i = 0; i < p; ++i) os << ",r_" << (i + 1);
  for (Eigen::Index i = 0; i < m; ++i) os << ",u_" << (i + 1);
  for (Eigen::Index i = 0; i < p; ++i) os << ",y_" << (i + 1);
  for (Eigen::Index i = 0; i < p; ++i) os << ",y_true_" << (i + 1);
  if (y_nom != nullptr) {
    for (Eigen::Index i = 0; i < p; ++i) os << ",y_nom_" << (i + 1);
  }
  os << ",status\n";
  const auto precision = os.precision(kFullPrecision);
  for (int t = 0; t < traj.steps_completed; ++t) {
    os << t;
    for (Eigen::Index i = 0; i < p; ++i) os << "," << traj.reference(i, t);
    for (Eigen::Index i = 0; i < m; ++i) os << "," << traj.inputs(i, t);
    for (Eigen::Index i = 0; i < p; ++i) os << "," << traj.outputs_measured(i, t);
    for (Eigen::Index i = 0; i < p; ++i) os << "," << traj.outputs_true(i, t);
    if (y_nom != nullptr) {
      for (Eigen::Index i = 0; i < p; ++i) os << "," << (*y_nom)(i, t);
    }
    os << "," << qp_status_name(traj.status[static_cast<std::size_t>(t)]) << "\n";
  }
  os.precision(precision);
}

void save_model(const DataDrivenModel& model, std::ostream& os) {
  os << "# regressor model v1\n";
  os << model.nbar << " " << model.m << " " << model.p << " "
     << model.episodes_used << " " << model.min_data_rank << "\n";
  const auto precision = os.precision(kFullPrecision);
  for (const auto& ch : model.channels) {
    for (Eigen::Index i = 0; i < ch.A.rows(); ++i) {
      for (Eigen::Index j = 0; j < ch.A.cols(); ++j) {
        if (j > 0) os << " ";
        os << ch.A(i, j);
      }
      for (Eigen::Index j = 0; j < ch.B.cols(); ++j) os << " " << ch.B(i, j);
      os << "\n";
    }
  }
  os.precision(precision);
}

DataDrivenModel load_model(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "# regressor model v1") {
    throw FileError("model file missing version header");
  }
  if (!std::getline(is, line)) throw FileError("model file truncated");
  {
    const auto fields = split(line, ' ');
    if (fields.size() != 5) throw FileError("model header has wrong field count");
    DataDrivenModel model;
    model.nbar = parse_int(fields[0]);
    model.m = parse_int(fields[1]);
    model.p = parse_int(fields[2]);
    model.episodes_used = parse_int(fields[3]);
    model.min_data_rank = parse_int(fields[4]);
    if (model.nbar < 1 || model.m < 1 || model.p < 1) {
      throw FileError("model header values out of range");
    }
    model.full_data_rank = (1 + model.m) * model.nbar + model.m;
    const Eigen::Index block = model.channel_size();
    model.channels.resize(static_cast<std::size_t>(model.p));
    for (auto& ch : model.channels) {
      ch.A.resize(block, block);
      ch.B.resize(block, model.m);
      for (Eigen::Index i = 0; i < block; ++i) {
        if (!std::getline(is, line)) throw FileError("model file truncated");
        const auto row = split(line, ' ');
        if (static_cast<Eigen::Index>(row.size()) != block + model.m) {
          throw FileError("model row has wrong field count");
        }
        for (Eigen::Index j = 0; j < block; ++j) {
          ch.A(i, j) = parse_double(row[static_cast<std::size_t>(j)]);
        }
        for (Eigen::Index j = 0; j < model.m; ++j) {
          ch.B(i, j) = parse_double(row[static_cast<std::size_t>(block + j)]);
        }
      }
    }
    return model;
  }
}

void save_model_file(const DataDrivenModel& model, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw FileError("cannot open '" + path + "' for writing");
  save_model(model, os);
  if (!os) throw FileError("write to '" + path + "' failed");
}

DataDrivenModel load_model_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw FileError("cannot open '" + path + "'");
  return load_model(is);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path);
  if (!os) throw FileError("cannot open '" + path + "' for writing");
  os << content;
  if (!os) throw FileError("write to '" + path + "' failed");
}

} // namespace d2pc
