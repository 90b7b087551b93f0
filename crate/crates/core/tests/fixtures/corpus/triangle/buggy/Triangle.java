public class Triangle {
    public static String classify(int a, int b, int c) {
        if (a + b <= c || a + c <= b || b + c <= a) {
            return "invalid";
        }
        if (a == b && b == c) {
            return "equilateral";
        }
        if (a == b || b == c) {
            return "isosceles";
        }
        return "scalene";
    }
}
