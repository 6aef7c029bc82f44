/* Copyright 2026 The bdcgan Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef BDCGAN_BDCGAN_HPP_
#define BDCGAN_BDCGAN_HPP_

#include "bdcgan/architecture.hpp"
#include "bdcgan/binkernels.hpp"
#include "bdcgan/bytes.hpp"
#include "bdcgan/dataio.hpp"
#include "bdcgan/discriminator.hpp"
#include "bdcgan/errors.hpp"
#include "bdcgan/export.hpp"
#include "bdcgan/generator.hpp"
#include "bdcgan/layers/batchnorm.hpp"
#include "bdcgan/layers/conv.hpp"
#include "bdcgan/layers/fc.hpp"
#include "bdcgan/modelio.hpp"
#include "bdcgan/rng.hpp"
#include "bdcgan/scenario.hpp"
#include "bdcgan/ste.hpp"
#include "bdcgan/tensor.hpp"
#include "bdcgan/training.hpp"

#endif  // BDCGAN_BDCGAN_HPP_
