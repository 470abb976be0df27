//! Block bit-plane packing of a multi-image set.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Smallest `e` with `2^e >= v`. `v` must be at least 1.
pub fn ceil_log2(v: u64) -> u32 {
    assert!(v >= 1, "ceil_log2 of zero");
    if v == 1 {
        0
    } else {
        64 - (v - 1).leading_zeros()
    }
}

/// Largest supported side exponent for image data.
pub const MAX_SIDE_EXP: u32 = 12;
/// Largest supported pixel depth.
pub const MAX_DEPTH: u32 = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageSet {
    n: u32,
    depth: u32,
    images: Vec<Vec<u16>>,
}

impl ImageSet {
    /// Images are row-major: pixel `(x, y)` sits at `y * 2^n + x`.
    pub fn new(n: u32, depth: u32, images: Vec<Vec<u16>>) -> Result<Self> {
        if n > MAX_SIDE_EXP {
            return Err(Error::Invalid(format!("side exponent {n} exceeds {MAX_SIDE_EXP}")));
        }
        if depth == 0 || depth > MAX_DEPTH {
            return Err(Error::Invalid(format!("bit depth {depth} outside 1..={MAX_DEPTH}")));
        }
        if images.is_empty() {
            return Err(Error::Invalid("an image set needs at least one image".into()));
        }
        let area = 1usize << (2 * n);
        let max = (1u32 << depth) - 1;
        for (i, img) in images.iter().enumerate() {
            if img.len() != area {
                return Err(Error::Dimension(format!(
                    "image {i} has {} pixels, expected {area}",
                    img.len()
                )));
            }
            if let Some(v) = img.iter().find(|&&v| u32::from(v) > max) {
                return Err(Error::Invalid(format!("image {i} holds intensity {v} > {max}")));
            }
        }
        Ok(Self { n, depth, images })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn side(&self) -> usize {
        1 << self.n
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[Vec<u16>] {
        &self.images
    }

    pub fn pixel(&self, image: usize, x: usize, y: usize) -> u16 {
        self.images[image][(y << self.n) + x]
    }

    pub fn layout(&self) -> BlockLayout {
        plan_layout(self.images.len() as u64, self.depth).expect("validated image set")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockLayout {
    pub images_per_block: usize,
    pub block_count: usize,
    pub padded_total: usize,
    pub blank_count: usize,
    /// Pixel depth L the layout was planned for.
    pub depth: u32,
}

impl BlockLayout {
    /// ⌈log₂L⌉: exponent of both the in-block image count and the padded plane count.
    pub fn plane_exp(&self) -> u32 {
        self.images_per_block.trailing_zeros()
    }

    /// ⌈log₂M⌉ − ⌈log₂L⌉, clamped at zero.
    pub fn block_exp(&self) -> u32 {
        self.block_count.trailing_zeros()
    }

    /// Global image index to (block, slot) in row-major order.
    pub fn locate(&self, index: usize) -> (usize, usize) {
        (index / self.images_per_block, index % self.images_per_block)
    }

    pub fn global_index(&self, t: usize, m: usize) -> usize {
        t * self.images_per_block + m
    }
}

pub fn plan_layout(m: u64, depth: u32) -> Result<BlockLayout> {
    if m == 0 {
        return Err(Error::Invalid("image count must be at least 1".into()));
    }
    if depth == 0 || depth > MAX_DEPTH {
        return Err(Error::Invalid(format!("bit depth {depth} outside 1..={MAX_DEPTH}")));
    }
    let lhat = ceil_log2(u64::from(depth));
    let lm = ceil_log2(m);
    let images_per_block = 1usize << lhat;
    let block_count = 1usize << lm.saturating_sub(lhat);
    let padded_total = images_per_block * block_count;
    Ok(BlockLayout {
        images_per_block,
        block_count,
        padded_total,
        blank_count: padded_total - m as usize,
        depth,
    })
}

/// The bit cube P(t, m, x, y, l), stored row-major in (t, m, l, y, x) order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitTensor {
    n: u32,
    lhat: u32,
    block_count: usize,
    bits: Vec<u8>,
}

impl BitTensor {
    pub fn zeros(n: u32, lhat: u32, block_count: usize) -> Self {
        let len = block_count << (2 * n + 2 * lhat);
        Self {
            n,
            lhat,
            block_count,
            bits: vec![0; len],
        }
    }

    pub fn for_layout(n: u32, layout: &BlockLayout) -> Self {
        Self::zeros(n, layout.plane_exp(), layout.block_count)
    }

    /// Wraps raw 0/1 values in storage order.
    pub fn from_bits(n: u32, lhat: u32, block_count: usize, bits: Vec<u8>) -> Result<Self> {
        let len = block_count << (2 * n + 2 * lhat);
        if bits.len() != len {
            return Err(Error::Dimension(format!(
                "{} bits supplied, expected {len}",
                bits.len()
            )));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::Invalid("bit values must be 0 or 1".into()));
        }
        Ok(Self {
            n,
            lhat,
            block_count,
            bits,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn lhat(&self) -> u32 {
        self.lhat
    }

    pub fn block_count(&self) -> usize {
        self.block_count
    }

    pub fn side(&self) -> usize {
        1 << self.n
    }

    /// 2^L̂: images per block and bit planes per image.
    pub fn planes(&self) -> usize {
        1 << self.lhat
    }

    /// Address bits: 2n for the pixel, L̂ for the plane and L̂ + log₂(blocks) for the image.
    pub fn address_bits(&self) -> u32 {
        2 * self.n + 2 * self.lhat + self.block_count.trailing_zeros()
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn bits_mut(&mut self) -> &mut [u8] {
        &mut self.bits
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }

    #[inline]
    pub fn index(&self, t: usize, m: usize, x: usize, y: usize, l: usize) -> usize {
        let p = self.planes();
        (((((t * p + m) * p + l) << self.n) + y) << self.n) + x
    }

    #[inline]
    pub fn get(&self, t: usize, m: usize, x: usize, y: usize, l: usize) -> u8 {
        self.bits[self.index(t, m, x, y, l)]
    }

    #[inline]
    pub fn set(&mut self, t: usize, m: usize, x: usize, y: usize, l: usize, v: u8) {
        let i = self.index(t, m, x, y, l);
        self.bits[i] = v & 1;
    }

    pub fn same_shape(&self, other: &BitTensor) -> bool {
        self.n == other.n && self.lhat == other.lhat && self.block_count == other.block_count
    }

    pub fn hamming_distance(&self, other: &BitTensor) -> usize {
        assert!(self.same_shape(other), "tensor shapes differ");
        self.bits.iter().zip(&other.bits).filter(|(a, b)| a != b).count()
    }
}

pub fn pack(set: &ImageSet) -> BitTensor {
    let layout = set.layout();
    let mut tensor = BitTensor::for_layout(set.n, &layout);
    let side = set.side();
    for (idx, img) in set.images.iter().enumerate() {
        let (t, m) = layout.locate(idx);
        for l in 0..set.depth as usize {
            let base = tensor.index(t, m, 0, 0, l);
            let plane = &mut tensor.bits[base..base + side * side];
            for (dst, &v) in plane.iter_mut().zip(img) {
                *dst = ((v >> l) & 1) as u8;
            }
        }
    }
    tensor
}

/// Reads back the first `m` images. Padding images and padding planes are ignored.
pub fn unpack(tensor: &BitTensor, layout: &BlockLayout, m: usize) -> Result<ImageSet> {
    if tensor.block_count != layout.block_count || tensor.planes() != layout.images_per_block {
        return Err(Error::Dimension(format!(
            "tensor has {} blocks of {} images, layout expects {} of {}",
            tensor.block_count,
            tensor.planes(),
            layout.block_count,
            layout.images_per_block
        )));
    }
    if m == 0 || m > layout.padded_total {
        return Err(Error::Dimension(format!(
            "image count {m} does not fit {} slots",
            layout.padded_total
        )));
    }
    let area = tensor.side() * tensor.side();
    let images = (0..m)
        .map(|idx| {
            let (t, slot) = layout.locate(idx);
            let mut img = vec![0u16; area];
            for l in 0..layout.depth as usize {
                let base = tensor.index(t, slot, 0, 0, l);
                for (px, &b) in img.iter_mut().zip(&tensor.bits[base..base + area]) {
                    *px |= u16::from(b) << l;
                }
            }
            img
        })
        .collect();
    ImageSet::new(tensor.n, layout.depth, images)
}

/// Reads a binary or ASCII PGM; the image must be square with a power-of-two side.
pub fn read_pgm(path: &Path) -> Result<(u32, Vec<u16>)> {
    let img = image::open(path).map_err(|source| Error::Image {
        path: path.into(),
        source,
    })?;
    let gray = img.to_luma8();
    let (w, h) = gray.dimensions();
    if w != h || !w.is_power_of_two() {
        return Err(Error::Dimension(format!(
            "{}: {w}x{h} is not a square power-of-two image",
            path.display()
        )));
    }
    let n = w.trailing_zeros();
    Ok((n, gray.into_raw().into_iter().map(u16::from).collect()))
}

/// Writes an 8-bit binary (P5) PGM.
pub fn write_pgm(path: &Path, n: u32, pixels: &[u16]) -> Result<()> {
    let side = 1u32 << n;
    let data: Vec<u8> = pixels
        .iter()
        .map(|&v| u8::try_from(v).map_err(|_| Error::Invalid(format!("intensity {v} exceeds 8 bits"))))
        .collect::<Result<_>>()?;
    let buf = image::GrayImage::from_raw(side, side, data)
        .ok_or_else(|| Error::Dimension(format!("{} pixels for a {side}x{side} image", pixels.len())))?;
    buf.save_with_format(path, image::ImageFormat::Pnm)
        .map_err(|source| Error::Image {
            path: path.into(),
            source,
        })
}

/// One image path per line; blank lines and `#` comments are skipped.
/// Relative paths resolve against the manifest's directory.
pub fn read_manifest(path: &Path) -> Result<Vec<PathBuf>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new(""));
    let paths: Vec<PathBuf> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| base.join(l))
        .collect();
    if paths.is_empty() {
        return Err(Error::Invalid(format!("{}: manifest lists no images", path.display())));
    }
    Ok(paths)
}

/// Loads every image named by a manifest as an 8-bit set.
pub fn load_manifest(path: &Path) -> Result<ImageSet> {
    let mut n = None;
    let mut images = Vec::new();
    for p in read_manifest(path)? {
        let (side_exp, px) = read_pgm(&p)?;
        match n {
            None => n = Some(side_exp),
            Some(prev) if prev != side_exp => {
                return Err(Error::Dimension(format!(
                    "{}: side 2^{side_exp} differs from earlier images (2^{prev})",
                    p.display()
                )))
            }
            _ => {}
        }
        images.push(px);
    }
    ImageSet::new(n.unwrap_or(0), 8, images)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_examples() {
        let l = plan_layout(200, 8).unwrap();
        assert_eq!((l.block_count, l.images_per_block, l.blank_count), (32, 8, 56));
        let l = plan_layout(8, 8).unwrap();
        assert_eq!((l.block_count, l.images_per_block, l.blank_count), (1, 8, 0));
        let l = plan_layout(30, 8).unwrap();
        assert_eq!((l.block_count, l.images_per_block, l.blank_count), (4, 8, 2));
        let l = plan_layout(3, 8).unwrap();
        assert_eq!((l.block_count, l.padded_total, l.blank_count), (1, 8, 5));
        assert!(plan_layout(0, 8).is_err());
    }

    #[test]
    fn ceil_log2_small() {
        let got: Vec<u32> = (1..=9).map(ceil_log2).collect();
        assert_eq!(got, [0, 1, 2, 2, 3, 3, 3, 3, 4]);
    }

    #[test]
    fn pack_single_pixel() {
        let set = ImageSet::new(0, 8, vec![vec![5]]).unwrap();
        let t = pack(&set);
        let ones: Vec<usize> = (0..8).filter(|&l| t.get(0, 0, 0, 0, l) == 1).collect();
        assert_eq!(ones, [0, 2]);
        assert_eq!(t.count_ones(), 2);
    }

    #[test]
    fn depth_five_pads_planes() {
        let set = ImageSet::new(0, 5, vec![vec![31]; 9]).unwrap();
        let layout = set.layout();
        assert_eq!((layout.images_per_block, layout.block_count), (8, 2));
        let t = pack(&set);
        for idx in 0..16 {
            let (b, m) = layout.locate(idx);
            for l in 0..8 {
                let want = u8::from(idx < 9 && l < 5);
                assert_eq!(t.get(b, m, 0, 0, l), want);
            }
        }
        assert_eq!(unpack(&t, &layout, 9).unwrap(), set);
    }

    #[test]
    fn unpack_ignores_padding() {
        let set = ImageSet::new(1, 8, vec![vec![1, 2, 3, 4]]).unwrap();
        let layout = set.layout();
        let mut t = pack(&set);
        t.set(0, 5, 1, 1, 7, 1);
        assert_eq!(unpack(&t, &layout, 1).unwrap(), set);
    }

    #[test]
    fn rejects_bad_sets() {
        assert!(ImageSet::new(1, 8, vec![]).is_err());
        assert!(ImageSet::new(1, 8, vec![vec![0; 3]]).is_err());
        assert!(ImageSet::new(1, 4, vec![vec![16, 0, 0, 0]]).is_err());
    }

    #[test]
    fn unpack_rejects_mismatched_layout() {
        let t = BitTensor::zeros(1, 3, 2);
        let layout = plan_layout(3, 8).unwrap();
        assert!(unpack(&t, &layout, 3).is_err());
    }
}
