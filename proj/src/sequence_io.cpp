#include "flowpull/sequence_io.hpp"

#include <algorithm>
#include <cstdio>
#include <regex>

#include "flowpull/media_io.hpp"

namespace flowpull {

namespace fs = std::filesystem;

std::string frame_stem(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%05d", index);
  return buf;
}

std::string positive_mask_name(const std::string& stem) { return stem + "_pos.png"; }
std::string forward_flow_name(const std::string& stem) { return "fwd_" + stem + ".flo"; }
std::string backward_flow_name(const std::string& stem) { return "bwd_" + stem + ".flo"; }

std::vector<std::string> list_frames(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("frame directory not found: " + dir.string());
  static const std::regex pattern(R"(\d{5}\.png)");
  std::vector<std::string> stems;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && std::regex_match(name, pattern)) {
      stems.push_back(entry.path().stem().string());
    }
  }
  std::sort(stems.begin(), stems.end());
  if (stems.empty()) throw Error("no frames named #####.png in " + dir.string());
  const int first = std::stoi(stems.front());
  for (std::size_t i = 0; i < stems.size(); ++i) {
    if (std::stoi(stems[i]) != first + static_cast<int>(i)) {
      throw Error("frame numbering gap before " + (dir / (stems[i] + ".png")).string());
    }
  }
  return stems;
}

namespace {

void require_file(const fs::path& path, const char* what) {
  if (!fs::is_regular_file(path)) throw Error(std::string("missing ") + what + ": " + path.string());
}

template <typename R>
void require_shape(const R& raster, int w, int h, const fs::path& path) {
  if (raster.width() != w || raster.height() != h) {
    throw Error("resolution " + std::to_string(raster.width()) + "x" +
                std::to_string(raster.height()) + " of " + path.string() + " differs from " +
                std::to_string(w) + "x" + std::to_string(h));
  }
}

}  // namespace

LoadedSequence load_sequence(const SequencePaths& paths, bool positive_masks) {
  LoadedSequence out;
  out.names = list_frames(paths.frames);
  Sequence& seq = out.sequence;
  const int length = static_cast<int>(out.names.size());
  int w = 0, h = 0;
  for (int i = 0; i < length; ++i) {
    const fs::path fp = paths.frames / (out.names[i] + ".png");
    Image frame = read_frame(fp);
    if (i == 0) {
      w = frame.width();
      h = frame.height();
    }
    require_shape(frame, w, h, fp);
    seq.frames.push_back(std::move(frame));

    const fs::path mp = paths.masks / (out.names[i] + ".png");
    require_file(mp, "mask");
    Mask mask = read_mask(mp);
    require_shape(mask, w, h, mp);
    seq.masks.push_back(std::move(mask));

    if (positive_masks) {
      const fs::path pp = paths.masks / positive_mask_name(out.names[i]);
      if (fs::exists(pp)) {
        Mask pos = read_mask(pp);
        require_shape(pos, w, h, pp);
        seq.positive_masks.push_back(std::move(pos));
      } else {
        seq.positive_masks.emplace_back(w, h, 0);
      }
    }
  }
  for (int i = 0; i + 1 < length; ++i) {
    for (bool forward : {true, false}) {
      const fs::path p = paths.flows / (forward ? forward_flow_name(out.names[i])
                                                : backward_flow_name(out.names[i]));
      require_file(p, "flow");
      FlowField flow = read_flow(p);
      require_shape(flow, w, h, p);
      (forward ? seq.flows.forward : seq.flows.backward).push_back(std::move(flow));
    }
  }
  return out;
}

void write_frames(const std::vector<Image>& frames, const std::vector<std::string>& names,
                  const fs::path& dir) {
  if (frames.size() != names.size()) throw Error("write_frames: name count mismatch");
  fs::create_directories(dir);
  for (std::size_t i = 0; i < frames.size(); ++i) write_frame(frames[i], dir / (names[i] + ".png"));
}

void write_scene(const Scene& scene, const fs::path& root) {
  const Sequence& seq = scene.sequence;
  for (const char* sub : {"frames", "masks", "flows", "gt"}) fs::create_directories(root / sub);
  for (int i = 0; i < seq.length(); ++i) {
    const std::string stem = frame_stem(i);
    write_frame(seq.frames[i], root / "frames" / (stem + ".png"));
    write_frame(scene.ground_truth[i], root / "gt" / (stem + ".png"));
    write_mask(seq.masks[i], root / "masks" / (stem + ".png"));
    if (!seq.positive_masks.empty()) {
      write_mask(seq.positive_masks[i], root / "masks" / positive_mask_name(stem));
    }
    if (i + 1 < seq.length()) {
      write_flow(seq.flows.forward[i], root / "flows" / forward_flow_name(stem));
      write_flow(seq.flows.backward[i], root / "flows" / backward_flow_name(stem));
    }
  }
}

}  // namespace flowpull
