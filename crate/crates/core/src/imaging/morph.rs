use super::{EdgeMap, ImagingError};

/// Binary dilation with a `(2r+1) x (2r+1)` square, computed as a
/// horizontal pass followed by a vertical pass.
pub fn dilate(map: &EdgeMap, kernel_radius: usize) -> Result<EdgeMap, ImagingError> {
    if kernel_radius == 0 {
        return Err(ImagingError::Radius);
    }
    let (w, h) = (map.width(), map.height());
    let r = kernel_radius as isize;
    let horizontal = EdgeMap::from_fn(w, h, |x, y| {
        (x as isize - r..=x as isize + r).any(|nx| map.get_signed(nx, y as isize))
    });
    Ok(EdgeMap::from_fn(w, h, |x, y| {
        (y as isize - r..=y as isize + r).any(|ny| horizontal.get_signed(x as isize, ny))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn single(w: usize, h: usize, x: usize, y: usize) -> EdgeMap {
        let mut m = EdgeMap::empty(w, h);
        m.set(x, y, true);
        m
    }

    fn block(map: &EdgeMap) -> (usize, usize, usize, usize, usize) {
        let pts: Vec<_> = map.iter_set().collect();
        let x0 = pts.iter().map(|p| p.0).min().unwrap();
        let x1 = pts.iter().map(|p| p.0).max().unwrap();
        let y0 = pts.iter().map(|p| p.1).min().unwrap();
        let y1 = pts.iter().map(|p| p.1).max().unwrap();
        (x0, x1, y0, y1, pts.len())
    }

    #[test]
    fn empty_stays_empty() {
        assert!(dilate(&EdgeMap::empty(8, 8), 1).unwrap().is_empty());
    }

    #[test]
    fn single_pixel_grows_to_blocks() {
        let once = dilate(&single(11, 11, 5, 5), 1).unwrap();
        assert_eq!(block(&once), (4, 6, 4, 6, 9));
        let twice = dilate(&once, 1).unwrap();
        assert_eq!(block(&twice), (3, 7, 3, 7, 25));
    }

    #[test]
    fn zero_radius_rejected() {
        assert_eq!(dilate(&EdgeMap::empty(2, 2), 0), Err(ImagingError::Radius));
    }

    fn arb_map() -> impl Strategy<Value = EdgeMap> {
        proptest::collection::vec(any::<bool>(), 12 * 9)
            .prop_map(|bits| EdgeMap::from_fn(12, 9, |x, y| bits[y * 12 + x]))
    }

    proptest! {
        #[test]
        fn dilation_is_extensive_and_monotone(a in arb_map(), b in arb_map(), r in 1usize..3) {
            let da = dilate(&a, r).unwrap();
            for (x, y) in a.iter_set() {
                prop_assert!(da.get(x, y));
            }
            let union = EdgeMap::from_fn(12, 9, |x, y| a.get(x, y) || b.get(x, y));
            let du = dilate(&union, r).unwrap();
            for (x, y) in da.iter_set() {
                prop_assert!(du.get(x, y));
            }
        }
    }
}
