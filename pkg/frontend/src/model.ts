// Default model text posted to the service when the dashboard starts.
// Mirrors the engine's bundled promo-sales model file.

export const DEFAULT_MODEL = `network "promo-sales" {
  node Promotions {
    kind: chance
    states: [Catalogue, InStore, NoPromotion]
    prior: [0.47, 0.08, 0.45]
  }
  node Price {
    kind: deterministic
    parents: [Promotions]
    states: [Normal, DiscountedInstore, DiscountedCatalogue]
    map: {
      (Catalogue) -> DiscountedCatalogue
      (InStore) -> DiscountedInstore
      (NoPromotion) -> Normal
    }
  }
  node ProductLocation {
    kind: deterministic
    parents: [Promotions]
    states: [Fixture, Gondola_InStore, Gondola_NP]
    map: {
      (Catalogue) -> Fixture
      (InStore) -> Gondola_InStore
      (NoPromotion) -> Gondola_NP
    }
  }
  node Sales {
    kind: equation
    parents: [Price, Promotions, ProductLocation]
    equation: Choose(Price, 0.25 * Triangular(9.6, 12, 24), Lognormal(3.1, 0.5242), Lognormal(4.36, 0.2889))
      + Choose(Promotions, Lognormal(4.766, 0.2889), Lognormal(3.507, 0.524), 0.375 * Triangular(9.6, 12, 24))
      + Choose(ProductLocation, Lognormal(4.766, 0.2889), Lognormal(3.507, 0.524), 0.375 * Triangular(9.6, 12, 24))
  }
}
`
