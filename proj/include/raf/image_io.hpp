#pragma once

// Image input/output for the CDP recovery demo. PNG and PGM in, PNG out; each
// color band is vectorized row-major into a length width*height vector with
// values in [0, 255]. Backed by OpenCV's imgcodecs; only targets that include
// this header need to link it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "raf/core.hpp"

namespace raf {

struct ImageData {
  int width = 0;
  int height = 0;
  std::vector<VecXd> bands;  // 1 (grayscale) or 3 (BGR order, as OpenCV loads)
};

inline ImageData load_image(const std::string& path) {
  cv::Mat img = cv::imread(path, cv::IMREAD_UNCHANGED);
  if (img.empty()) throw std::runtime_error("cannot read image '" + path + "'");
  if (img.depth() != CV_8U) img.convertTo(img, CV_8U);
  if (img.channels() == 4) cv::cvtColor(img, img, cv::COLOR_BGRA2BGR);
  ImageData data;
  data.width = img.cols;
  data.height = img.rows;
  std::vector<cv::Mat> channels;
  cv::split(img, channels);
  for (const cv::Mat& channel : channels) {
    VecXd band(static_cast<Index>(img.rows) * img.cols);
    Index i = 0;
    for (int r = 0; r < img.rows; ++r)
      for (int c = 0; c < img.cols; ++c) band(i++) = channel.at<std::uint8_t>(r, c);
    data.bands.push_back(std::move(band));
  }
  return data;
}

inline void save_png(const std::string& path, const ImageData& data) {
  if (data.bands.empty()) throw std::invalid_argument("save_png: no bands");
  std::vector<cv::Mat> channels;
  for (const VecXd& band : data.bands) {
    if (band.size() != static_cast<Index>(data.width) * data.height)
      throw std::invalid_argument("save_png: band size does not match dimensions");
    cv::Mat channel(data.height, data.width, CV_8U);
    Index i = 0;
    for (int r = 0; r < data.height; ++r)
      for (int c = 0; c < data.width; ++c) {
        const double v = std::clamp(band(i++), 0.0, 255.0);
        channel.at<std::uint8_t>(r, c) = static_cast<std::uint8_t>(std::lround(v));
      }
    channels.push_back(std::move(channel));
  }
  cv::Mat img;
  cv::merge(channels, img);
  if (!cv::imwrite(path, img)) throw std::runtime_error("cannot write image '" + path + "'");
}

}  // namespace raf
