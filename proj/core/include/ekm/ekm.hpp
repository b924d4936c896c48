#pragma once

#include "ekm/crossval.hpp"
#include "ekm/dataio.hpp"
#include "ekm/downsample.hpp"
#include "ekm/error.hpp"
#include "ekm/gram.hpp"
#include "ekm/kernels.hpp"
#include "ekm/motion.hpp"
#include "ekm/svm.hpp"
