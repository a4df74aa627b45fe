#pragma once

#include <iosfwd>
#include <string>

#include "d2pc/controllers.hpp"
#include "d2pc/datadriven.hpp"

namespace d2pc {

// CSV with one row per sample; time starts at -initial_offset so warm-up
// samples keep their place. Round-trips bit-exactly through read_episode_csv.
void write_episode_csv(const EpisodeData& ep, std::ostream& os);
[[nodiscard]] EpisodeData read_episode_csv(std::istream& is);

// Closed-loop record; y_nom columns are included when a nominal trajectory
// is supplied. Failed steps carry the solver status in the last column.
void write_trajectory_csv(const Trajectory& traj, const Matrix* y_nom,
                          std::ostream& os);

// Versioned plain-text model format, full double precision.
void save_model(const DataDrivenModel& model, std::ostream& os);
[[nodiscard]] DataDrivenModel load_model(std::istream& is);

// File-path conveniences; throw FileError when the file cannot be opened.
void save_model_file(const DataDrivenModel& model, const std::string& path);
[[nodiscard]] DataDrivenModel load_model_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

[[nodiscard]] const char* qp_status_name(QpStatus s);

} // namespace d2pc
