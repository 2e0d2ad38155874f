#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "syncurator/landmarks.hpp"

namespace testing_support {

using namespace syncurator;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("syncurator-" + tag + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline FaceMesh random_face(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.05, 0.95);
    FaceMesh face;
    for (auto& p : face) p = {u(rng), u(rng)};
    return face;
}

inline PoseSkeleton random_pose(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.05, 0.95);
    PoseSkeleton pose;
    for (auto& p : pose) p = {u(rng), u(rng)};
    return pose;
}

/// Every landmark drawn uniformly; `missing` is the per-subsystem miss rate.
inline LandmarkBundle random_bundle(std::uint64_t seed, std::size_t frames, double missing = 0.0,
                                    View view = View::source) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    LandmarkBundle b;
    b.video_id = "random-" + std::to_string(seed);
    b.view = view;
    b.fps = 20.0;
    for (std::size_t i = 0; i < frames; ++i) {
        LandmarkFrame f;
        f.frame_index = i;
        if (coin(rng) >= missing) f.face = random_face(rng);
        if (coin(rng) >= missing) f.pose = random_pose(rng);
        b.frames.push_back(std::move(f));
    }
    return b;
}

inline double dist(LandmarkPoint a, LandmarkPoint b) {
    return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y));
}

} // namespace testing_support
