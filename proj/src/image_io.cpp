#include "maskguide/image_io.hpp"

#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <cmath>

#include "maskguide/errors.hpp"

namespace mg {

namespace {

cv::Mat load_gray(const std::string& path) {
    cv::Mat m = cv::imread(path, cv::IMREAD_GRAYSCALE);
    if (m.empty()) throw ConfigError("cannot read PNG: " + path);
    return m;
}

std::uint8_t quantize(float v) {
    v = std::clamp(v, 0.f, 1.f);
    return static_cast<std::uint8_t>(std::lround(v * 255.f));
}

}  // namespace

Tensor load_image_png(const std::string& path) {
    cv::Mat m = cv::imread(path, cv::IMREAD_COLOR);  // BGR
    if (m.empty()) throw ConfigError("cannot read PNG: " + path);
    Tensor img({3, m.rows, m.cols});
    for (int y = 0; y < m.rows; ++y)
        for (int x = 0; x < m.cols; ++x) {
            auto px = m.at<cv::Vec3b>(y, x);
            img.at(0, y, x) = px[2] / 255.f;
            img.at(1, y, x) = px[1] / 255.f;
            img.at(2, y, x) = px[0] / 255.f;
        }
    return img;
}

void save_image_png(const std::string& path, const Tensor& img) {
    check_arg(img.shape.size() == 3 && img.dim(0) == 3, "expected 3×H×W image");
    cv::Mat m(img.dim(1), img.dim(2), CV_8UC3);
    for (int y = 0; y < m.rows; ++y)
        for (int x = 0; x < m.cols; ++x)
            m.at<cv::Vec3b>(y, x) =
                cv::Vec3b(quantize(img.at(2, y, x)), quantize(img.at(1, y, x)), quantize(img.at(0, y, x)));
    if (!cv::imwrite(path, m)) throw ConfigError("cannot write PNG: " + path);
}

BinaryMask load_mask_png(const std::string& path) {
    cv::Mat m = load_gray(path);
    BinaryMask mask(m.rows, m.cols);
    for (int y = 0; y < m.rows; ++y)
        for (int x = 0; x < m.cols; ++x) mask.at(y, x) = m.at<std::uint8_t>(y, x) >= 128 ? 1 : 0;
    return mask;
}

void save_mask_png(const std::string& path, const BinaryMask& mask) {
    cv::Mat m(mask.height, mask.width, CV_8UC1);
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x) m.at<std::uint8_t>(y, x) = mask.at(y, x) ? 255 : 0;
    if (!cv::imwrite(path, m)) throw ConfigError("cannot write PNG: " + path);
}

SoftMask load_soft_mask_png(const std::string& path) {
    cv::Mat m = load_gray(path);
    SoftMask mask(m.rows, m.cols);
    for (int y = 0; y < m.rows; ++y)
        for (int x = 0; x < m.cols; ++x) mask.at(y, x) = m.at<std::uint8_t>(y, x) / 255.f;
    return mask;
}

void save_soft_mask_png(const std::string& path, const SoftMask& mask) {
    cv::Mat m(mask.height, mask.width, CV_8UC1);
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x) m.at<std::uint8_t>(y, x) = quantize(mask.at(y, x));
    if (!cv::imwrite(path, m)) throw ConfigError("cannot write PNG: " + path);
}

Tensor load_condition_png(const std::string& path) {
    cv::Mat m = load_gray(path);
    Tensor cond({1, m.rows, m.cols});
    for (int y = 0; y < m.rows; ++y)
        for (int x = 0; x < m.cols; ++x) cond.at(0, y, x) = m.at<std::uint8_t>(y, x) / 255.f;
    return cond;
}

void save_condition_png(const std::string& path, const Tensor& cond) {
    check_arg(cond.shape.size() == 3 && cond.dim(0) == 1, "expected 1×H×W condition");
    cv::Mat m(cond.dim(1), cond.dim(2), CV_8UC1);
    for (int y = 0; y < m.rows; ++y)
        for (int x = 0; x < m.cols; ++x) m.at<std::uint8_t>(y, x) = quantize(cond.at(0, y, x));
    if (!cv::imwrite(path, m)) throw ConfigError("cannot write PNG: " + path);
}

}  // namespace mg
